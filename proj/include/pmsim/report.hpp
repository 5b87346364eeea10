#pragma once

#include <sstream>

#include "pmsim/orchestrator.hpp"

namespace pmsim {

// Human- and machine-readable views over a RunResult, derived purely from
// what replay reconstructs.

struct LeaderboardRow {
  std::string agent_id;
  Micro final_value = 0;
  Micro total_pnl = 0;
  Cpp return_pct_cpp = 0;
  std::optional<Cpp> win_rate_early_exit_cpp;
  Cpp max_drawdown_cpp = 0;
};

struct ReportBundle {
  std::vector<LeaderboardRow> leaderboard; // ranked by final account value
  std::map<std::string, MetricsReport> per_agent;
};

inline ReportBundle build_reports(const RunResult& run) {
  ReportBundle b;
  for (const auto& [id, ar] : run.per_agent) {
    const MetricsReport& m = ar.metrics;
    b.per_agent[id] = m;
    LeaderboardRow row;
    row.agent_id = id;
    row.final_value = m.final_value;
    row.total_pnl = m.total_pnl;
    row.return_pct_cpp = m.return_pct_cpp;
    row.win_rate_early_exit_cpp = m.win_early_exit.rate_cpp;
    row.max_drawdown_cpp = m.max_drawdown_cpp;
    b.leaderboard.push_back(std::move(row));
  }
  std::sort(b.leaderboard.begin(), b.leaderboard.end(),
            [](const LeaderboardRow& a, const LeaderboardRow& c) {
              if (a.final_value != c.final_value)
                return a.final_value > c.final_value;
              return a.agent_id < c.agent_id;
            });
  return b;
}

inline std::string render_leaderboard_csv(const ReportBundle& b) {
  std::ostringstream out;
  out << "Model,Final Value,Total PnL,Total Return,Win Rate (Early Exit),Max DD\n";
  for (const LeaderboardRow& r : b.leaderboard) {
    out << r.agent_id << ',' << format_dollars(r.final_value) << ','
        << format_dollars(r.total_pnl) << ',' << format_cpp(r.return_pct_cpp)
        << ','
        << (r.win_rate_early_exit_cpp ? format_cpp(*r.win_rate_early_exit_cpp)
                                      : "N/A")
        << ',' << format_cpp(r.max_drawdown_cpp) << '\n';
  }
  return out.str();
}

inline std::string render_category_csv(const ReportBundle& b) {
  std::ostringstream out;
  out << "Model,Category,Settled,Settlement Win Rate,Total PnL\n";
  for (const auto& [id, m] : b.per_agent) {
    for (const CategoryRow& row : m.per_category) {
      out << id << ',' << to_string(row.category) << ',' << row.settled << ','
          << (row.settlement_win.rate_cpp
                  ? format_cpp(*row.settlement_win.rate_cpp)
                  : "N/A")
          << ',' << format_dollars(row.total_pnl) << '\n';
    }
  }
  return out.str();
}

inline std::string render_exit_csv(const ReportBundle& b) {
  std::ostringstream out;
  out << "Model,Settlements,Early Exits,Settlement Rate,Early Exit Rate,"
         "Avg PnL Settlement,Avg PnL Early Exit\n";
  for (const auto& [id, m] : b.per_agent) {
    const ExitPatternStats& e = m.exit_pattern;
    out << id << ',' << e.settlements << ',' << e.nettings << ','
        << (e.settlement_rate_cpp ? format_cpp(*e.settlement_rate_cpp) : "N/A")
        << ','
        << (e.early_exit_rate_cpp ? format_cpp(*e.early_exit_rate_cpp) : "N/A")
        << ','
        << (e.avg_pnl_settlement ? format_dollars(*e.avg_pnl_settlement) : "N/A")
        << ','
        << (e.avg_pnl_netting ? format_dollars(*e.avg_pnl_netting) : "N/A")
        << '\n';
  }
  return out.str();
}

inline std::string render_text(const ReportBundle& b) {
  std::ostringstream out;
  out << "=== Leaderboard (by final account value) ===\n";
  int rank = 1;
  for (const LeaderboardRow& r : b.leaderboard) {
    out << rank++ << ". " << r.agent_id << "  value $"
        << format_dollars(r.final_value) << "  pnl $"
        << format_dollars(r.total_pnl) << "  return "
        << format_cpp(r.return_pct_cpp) << "  maxDD "
        << format_cpp(r.max_drawdown_cpp) << "  winEE "
        << (r.win_rate_early_exit_cpp ? format_cpp(*r.win_rate_early_exit_cpp)
                                      : "N/A")
        << '\n';
  }
  out << "\n=== Exit patterns ===\n";
  for (const auto& [id, m] : b.per_agent) {
    const ExitPatternStats& e = m.exit_pattern;
    out << id << ": settlements " << e.settlements << ", early exits "
        << e.nettings;
    if (e.settlement_rate_cpp)
      out << " (" << format_cpp(*e.settlement_rate_cpp) << " / "
          << format_cpp(*e.early_exit_rate_cpp) << ")";
    out << '\n';
  }
  out << "\n=== Category breakdown ===\n";
  for (const auto& [id, m] : b.per_agent) {
    for (const CategoryRow& row : m.per_category) {
      out << id << "  " << to_string(row.category) << "  settled "
          << row.settled << "  win "
          << (row.settlement_win.rate_cpp
                  ? format_cpp(*row.settlement_win.rate_cpp)
                  : "N/A")
          << "  pnl $" << format_dollars(row.total_pnl) << '\n';
    }
  }
  return out.str();
}

} // namespace pmsim
