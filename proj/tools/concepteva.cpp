// concepteva: command-line front end (batch runs and the web service).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ceva/error.hpp"
#include "ceva/pipeline.hpp"
#include "ceva/service.hpp"
#include "ceva/storage.hpp"

namespace {

using namespace ceva;

std::shared_ptr<const Gazetteer> load_gaz(const std::string& path) {
  auto gaz = std::make_shared<Gazetteer>();
  if (!path.empty()) *gaz = load_gazetteer(read_file(path));
  return gaz;
}

std::string backend_spec(const std::string& flag) {
  if (const char* env = std::getenv("CONCEPTEVA_BACKEND"); env && *env) return env;
  return flag;
}

void write_out(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PersistenceError("cannot write " + path);
  out << content;
  if (!out) throw PersistenceError("cannot write " + path);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DocumentAnalysis analyze(const std::string& doc_path, const std::string& gaz_path,
                         const std::string& backend) {
  auto gaz = load_gaz(gaz_path);
  return analyze_document(parse_document(read_file(doc_path)), gaz,
                          make_backend_factory(backend_spec(backend), gaz));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept-based evaluation and customization of document summaries"};
  app.require_subcommand(1);

  std::string doc_path, gaz_path, backend = "mock", metric = "frequency", out;
  std::string listen = "127.0.0.1:8080", data_dir = "data";
  double top = 100.0;
  std::size_t k = 5, max_tokens = 200;
  std::vector<std::string> focus, concepts;
  bool as_json = false;

  auto* serve = app.add_subcommand("serve", "Run the web service");
  serve->add_option("--listen", listen, "host:port")->capture_default_str();
  serve->add_option("--data-dir", data_dir, "Directory for documents and sessions")
      ->capture_default_str();
  serve->add_option("--gazetteer", gaz_path, "Gazetteer TSV");
  serve->add_option("--backend", backend, "mock or backend URL")->capture_default_str();
  serve->add_option("--k", k, "Default neighbours per concept")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Validate a document and report counts");
  ingest->add_option("doc", doc_path, "Document JSON")->required();

  auto* conc = app.add_subcommand("concepts", "Concept statistics table");
  conc->add_option("doc", doc_path, "Document JSON")->required();
  conc->add_option("--gazetteer", gaz_path, "Gazetteer TSV")->required();
  conc->add_option("--metric", metric, "frequency or tfidf")->capture_default_str();
  conc->add_option("--top", top, "Percentage of concepts to keep")->capture_default_str();
  conc->add_flag("--json", as_json, "Emit JSON instead of TSV");

  auto* lay = app.add_subcommand("layout", "Concept layout export");
  lay->add_option("doc", doc_path, "Document JSON")->required();
  lay->add_option("--gazetteer", gaz_path, "Gazetteer TSV")->required();
  lay->add_option("--focus", focus, "Concepts to focus on")->delimiter(',');
  lay->add_option("--metric", metric, "Node size metric")->capture_default_str();
  lay->add_option("--top", top, "Percentage of concepts shown")->capture_default_str();
  lay->add_option("--backend", backend, "mock or backend URL")->capture_default_str();
  lay->add_option("--out", out, "Output file (default stdout)");

  auto* summ = app.add_subcommand("summarize", "Summarize, then customize by concepts");
  summ->add_option("doc", doc_path, "Document JSON")->required();
  summ->add_option("--gazetteer", gaz_path, "Gazetteer TSV")->required();
  summ->add_option("--concepts", concepts, "Concepts to steer by")->delimiter(',');
  summ->add_option("--backend", backend, "mock or backend URL")->capture_default_str();
  summ->add_option("--k", k, "Neighbours per concept")->capture_default_str();
  summ->add_option("--max-tokens", max_tokens, "Summary token budget")
      ->capture_default_str();
  summ->add_option("--out", out,
                   "Summary file; provenance goes to <out>.provenance.tsv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*serve) {
      ServiceConfig cfg;
      cfg.listen = listen;
      cfg.data_dir = data_dir;
      cfg.gazetteer_path = gaz_path;
      cfg.backend = backend_spec(backend);
      cfg.k = k;
      Service service(cfg);
      HttpService http(service);
      auto [host, port] = parse_listen_address(cfg.listen);
      std::cerr << "concepteva: listening on " << host << ":" << port << "\n";
      http.listen(host, port);
      return 0;
    }

    if (*ingest) {
      SourceDocument doc = parse_document(read_file(doc_path));
      std::cout << "doc_id\t" << doc.doc_id << "\n"
                << "sections\t" << doc.sections.size() << "\n"
                << "sentences\t" << doc.sentence_count() << "\n"
                << "tokens\t" << doc.token_count << "\n";
      return 0;
    }

    if (*conc) {
      auto gaz = load_gaz(gaz_path);
      SourceDocument doc = parse_document(read_file(doc_path));
      ImportanceMetric m = parse_metric(metric);
      ConceptStatsMap stats = compute_stats(spot_concepts(doc, *gaz), doc);
      if (as_json) {
        DocumentAnalysis a;
        a.gazetteer = gaz;
        a.stats = stats;
        std::cout << concept_table_json(a, m, top).dump(2) << "\n";
        return 0;
      }
      std::cout << "concept_id\tlabel\tfrequency\ttfidf\tsection_counts\n";
      if (stats.empty()) return 0;
      for (const auto& id : top_k_percent(stats, m, top)) {
        const auto& cs = stats.at(id);
        std::string counts;
        for (std::size_t i = 0; i < cs.section_counts.size(); ++i)
          counts += (i ? "," : "") + std::to_string(cs.section_counts[i]);
        std::cout << id << "\t" << gaz->at(id).label << "\t" << cs.frequency << "\t"
                  << fmt(cs.tfidf) << "\t" << counts << "\n";
      }
      return 0;
    }

    if (*lay) {
      DocumentAnalysis a = analyze(doc_path, gaz_path, backend);
      ImportanceMetric m = parse_metric(metric);
      std::vector<std::string> visible;
      if (!a.stats.empty()) visible = top_k_percent(a.stats, m, top);
      LayoutState state = a.layout;
      if (!focus.empty()) {
        for (const auto& c : focus)
          if (!a.stats.count(c))
            throw ArgumentError("concept " + c + " does not occur in the document",
                                "focus");
        state = focus_on(a.layout, {focus.begin(), focus.end()},
                         a.concept_embeddings, a.graph, LayoutConfig{});
      }
      write_out(out, layout_export(state, a, m, &visible).dump(2) + "\n");
      return 0;
    }

    if (*summ) {
      DocumentAnalysis a = analyze(doc_path, gaz_path, backend);
      SummaryOptions opts;
      opts.max_summary_tokens = max_tokens;
      SummarySession s = generate_initial_summary(a.doc, *a.backend, "cli", opts,
                                                  RetrievalConfig{k});
      if (!concepts.empty()) {
        for (const auto& c : concepts)
          if (!a.stats.count(c))
            throw ArgumentError("concept " + c + " does not occur in the document",
                                "concepts");
        s = customize(s, concepts, a.concept_embeddings, a.doc, a.index, *a.backend,
                      opts)
                .session;
      }
      if (out.empty()) {
        std::cout << export_summary_text(s);
      } else {
        write_out(out, export_summary_text(s));
        write_out(out + ".provenance.tsv", export_provenance(s));
      }
      return 0;
    }
  } catch (const ArgumentError& e) {
    std::cerr << "concepteva: " << e.what();
    if (!e.field().empty()) std::cerr << " (" << e.field() << ")";
    std::cerr << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "concepteva: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
