#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pmsim/replay.hpp"
#include "pmsim/report.hpp"

namespace fs = std::filesystem;
using namespace pmsim;

namespace {

std::string default_out_dir() {
  if (const char* env = std::getenv("PMSIM_OUT")) return env;
  return "pmsim_out";
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config: " + path);
  json j = json::parse(f);
  RunConfig cfg = j.get<RunConfig>();
  validate(cfg);
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write: " + path.string());
  f << content;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  RunConfig cfg = load_config(config_path);
  fs::create_directories(out_dir);
  fs::path log_path = fs::path(out_dir) / "events.log";
  std::ofstream log_stream(log_path, std::ios::binary);
  if (!log_stream) throw ValidationError("cannot write: " + log_path.string());

  Orchestrator orch(cfg, &log_stream);
  save_universe(orch.universe(), (fs::path(out_dir) / "universe.jsonl").string());
  RunResult result = orch.run();
  log_stream.flush();

  ReportBundle reports = build_reports(result);
  write_file(fs::path(out_dir) / "leaderboard.csv", render_leaderboard_csv(reports));
  write_file(fs::path(out_dir) / "categories.csv", render_category_csv(reports));
  write_file(fs::path(out_dir) / "exits.csv", render_exit_csv(reports));
  write_file(fs::path(out_dir) / "report.txt", render_text(reports));

  std::cout << render_text(reports);
  std::cout << "\nwrote " << out_dir << "/{events.log, universe.jsonl, "
            << "leaderboard.csv, categories.csv, exits.csv, report.txt}\n";
  return 0;
}

int cmd_report(const std::string& log_path, const std::string& format) {
  LogContents log = read_log(log_path);
  if (log.truncated_tail)
    std::cerr << "warning: dropped truncated final line\n";
  RunResult result = replay(log);
  ReportBundle reports = build_reports(result);
  if (format == "csv") {
    std::cout << render_leaderboard_csv(reports) << '\n'
              << render_category_csv(reports) << '\n'
              << render_exit_csv(reports);
  } else {
    std::cout << render_text(reports);
  }
  return 0;
}

int cmd_replay(const std::string& log_path) {
  LogContents log = read_log(log_path);
  if (log.truncated_tail)
    std::cerr << "warning: dropped truncated final line\n";
  audit_cash_attribution(log);
  RunResult result = replay(log);
  std::int64_t snapshots = 0;
  for (const auto& [id, ar] : result.per_agent)
    snapshots += static_cast<std::int64_t>(ar.snapshots.size());
  std::cout << "replayed " << log.events.size() << " events, "
            << result.per_agent.size() << " agents, " << snapshots
            << " snapshots; cash attribution audit passed\n";
  std::cout << render_text(build_reports(result));
  return 0;
}

int cmd_discover(const std::string& universe_path, const std::string& kind,
                 const std::string& keyword, const std::string& tag,
                 std::int64_t window, std::int64_t limit,
                 std::int64_t min_liquidity, std::int64_t min_volume,
                 std::int64_t min_move) {
  Universe u = load_universe(universe_path);
  QuoteHistory history;
  for (const auto& [id, q] : u.quotes) history[id].push_back(q);
  DiscoveryQuery q;
  q.kind = query_kind_from_string(kind);
  q.keyword = keyword;
  if (!tag.empty()) q.tag = category_from_string(tag);
  q.window_secs = window;
  q.limit = limit;
  QualityFilter f;
  f.min_liquidity = min_liquidity;
  f.min_volume = min_volume;
  f.min_price_move = min_move;
  std::int64_t now = u.params.t0;
  std::vector<std::string> ids = discover(u, history, q, f, now);
  for (const std::string& id : ids) {
    const SyntheticMarket* m = u.find(id);
    const QuoteTop& quote = u.quotes.at(id);
    std::cout << id << "  [" << to_string(m->spec.category) << "]  bid/ask "
              << quote.yes_bid << '/' << quote.yes_ask << "  vol "
              << quote.volume << "  " << m->spec.title << '\n';
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"binary prediction-market trading harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir = default_out_dir();
  auto* run = app.add_subcommand("run", "execute a configured arena run");
  run->add_option("--config", config_path, "run config JSON")->required();
  run->add_option("--out", out_dir, "output directory (env PMSIM_OUT)");

  std::string log_path, format = "text";
  auto* report = app.add_subcommand("report", "render reports from an event log");
  report->add_option("--log", log_path, "event log path")->required();
  report->add_option("--format", format, "text or csv")
      ->check(CLI::IsMember({"text", "csv"}));

  std::string replay_log;
  auto* rep = app.add_subcommand("replay", "rebuild results from an event log");
  rep->add_option("--log", replay_log, "event log path")->required();

  std::string universe_path, kind = "VolumeTop", keyword, tag;
  std::int64_t window = 0, limit = 10, min_liquidity = 0, min_volume = 0,
               min_move = 0;
  auto* disc = app.add_subcommand("discover", "query a universe fixture");
  disc->add_option("--universe", universe_path, "universe fixture path")->required();
  disc->add_option("--kind", kind,
                   "Keyword|Tag|VolumeTop|VolatilityTop|Trending|ExpiringWithin");
  disc->add_option("--keyword", keyword, "keyword (Keyword queries)");
  disc->add_option("--tag", tag, "category (Tag queries)");
  disc->add_option("--window", window, "window seconds");
  disc->add_option("--limit", limit, "max results");
  disc->add_option("--min-liquidity", min_liquidity, "milli-shares at top of book");
  disc->add_option("--min-volume", min_volume, "milli-shares traded");
  disc->add_option("--min-move", min_move, "micro-dollar mid move");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*report) return cmd_report(log_path, format);
    if (*rep) return cmd_replay(replay_log);
    if (*disc)
      return cmd_discover(universe_path, kind, keyword, tag, window, limit,
                          min_liquidity, min_volume, min_move);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
