#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace contagion::market_data {

// ── dates ───────────────────────────────────────────────────────────────────

using Date = int;  // days since 1970-01-01

[[nodiscard]] Date date_from_ymd(int year, int month, int day);
void date_to_ymd(Date date, int& year, int& month, int& day);
[[nodiscard]] Date parse_date(const std::string& iso);  // "YYYY-MM-DD"
[[nodiscard]] std::string format_date(Date date);

// ── types ───────────────────────────────────────────────────────────────────

enum class Side { Buy, Sell };

struct Transaction {
    int agent_id{0};
    int company_id{0};
    int security_id{0};
    Date date{0};
    Side side{Side::Buy};
    double price{0.0};
    double quantity{0.0};

    [[nodiscard]] double volume() const { return price * quantity; }
};

struct AnnouncementCalendar {
    std::map<int, std::vector<Date>> by_company;  // ascending per company
    int delta{5};  // pre window is the open interval (t - delta, t) in trading days
};

struct DailyPoint {
    Date date{0};
    double ret{0.0};     // value-weighted daily return
    double profit{0.0};  // sum of per-transaction return * volume
    bool is_pre{false};  // inside a pre-announcement window of the company
};

struct AgentReturnSeries {
    int agent_id{0};
    int company_id{0};
    std::vector<DailyPoint> days;  // sorted by date
};

// Per-company labeling aligned to the trading-day axis.
struct WindowLabels {
    std::vector<std::uint8_t> is_pre;        // one flag per trading day
    // Trading-day indices per announcement; a day claimed by an earlier
    // announcement's window is excluded from later ones.
    std::vector<std::vector<int>> windows;
    int snapped{0};  // announcements moved to the next trading day
    int dropped{0};  // announcements past the last trading day
};

struct BuildResult {
    std::vector<AgentReturnSeries> series;
    std::vector<Date> trading_days;
    int skipped_no_future_price{0};
    int snapped_announcements{0};
    int dropped_announcements{0};
};

// ── operations ──────────────────────────────────────────────────────────────

// Signed log return over the holding horizon: sign * ln(future / price),
// sign = +1 for buys, -1 for sells.
[[nodiscard]] double transaction_return(const Transaction& tx, double future_price);

// Sum(r * V) / Sum(V); empty input -> nullopt.
[[nodiscard]] std::optional<double> daily_value_weighted_return(std::span<const double> returns,
                                                               std::span<const double> volumes);

// Mark each trading day that falls in an open pre-announcement interval
// (t - delta, t). Announcements on non-trading days snap to the next trading
// day; days shared by two windows belong to the earlier one.
[[nodiscard]] WindowLabels label_windows(std::span<const Date> trading_days,
                                         std::span<const Date> announcements, int delta);

// Full pipeline: future-price lookup (median price on the first trading day
// >= t + 7 calendar days, searching forward up to 10 trading days, else the
// transaction is dropped), per-day value-weighted returns and profits, and
// pre-window labels per (agent, company).
[[nodiscard]] BuildResult build_series(std::span<const Transaction> transactions,
                                       const AnnouncementCalendar& calendar);

// ── CSV I/O ─────────────────────────────────────────────────────────────────

// `agent_id,company_id,security_id,date,side,price,quantity`
[[nodiscard]] std::vector<Transaction> read_transactions_csv(const std::string& path);
// `company_id,date`
[[nodiscard]] AnnouncementCalendar read_announcements_csv(const std::string& path, int delta = 5);
// `agent_id,company_id,date,return,profit,is_pre`
void write_series_csv(std::span<const AgentReturnSeries> series, const std::string& path);
[[nodiscard]] std::vector<AgentReturnSeries> read_series_csv(const std::string& path);

}  // namespace contagion::market_data
