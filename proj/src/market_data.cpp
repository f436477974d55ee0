#include "contagion/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "contagion/csv.hpp"

namespace contagion::market_data {

// ── dates (Howard Hinnant's civil-day algorithms) ───────────────────────────

Date date_from_ymd(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1 || d > 31) {
        throw std::invalid_argument("date_from_ymd: month/day out of range");
    }
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void date_to_ymd(Date z, int& y, int& m, int& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = yr + (m <= 2);
}

Date parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3) {
        throw std::invalid_argument("parse_date: expected YYYY-MM-DD, got '" + iso + "'");
    }
    return date_from_ymd(y, m, d);
}

std::string format_date(Date date) {
    int y, m, d;
    date_to_ymd(date, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

// ── operations ──────────────────────────────────────────────────────────────

double transaction_return(const Transaction& tx, double future_price) {
    if (tx.price <= 0.0 || future_price <= 0.0) {
        throw std::invalid_argument("transaction_return: prices must be positive");
    }
    const double sign = tx.side == Side::Buy ? 1.0 : -1.0;
    return sign * std::log(future_price / tx.price);
}

std::optional<double> daily_value_weighted_return(std::span<const double> returns,
                                                  std::span<const double> volumes) {
    if (returns.size() != volumes.size()) {
        throw std::invalid_argument("daily_value_weighted_return: size mismatch");
    }
    if (returns.empty()) return std::nullopt;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        if (volumes[i] < 0.0) {
            throw std::invalid_argument("daily_value_weighted_return: negative volume");
        }
        num += returns[i] * volumes[i];
        den += volumes[i];
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
}

WindowLabels label_windows(std::span<const Date> trading_days,
                           std::span<const Date> announcements, int delta) {
    if (delta < 1) throw std::invalid_argument("label_windows: delta must be >= 1");
    for (std::size_t i = 1; i < trading_days.size(); ++i) {
        if (trading_days[i] <= trading_days[i - 1]) {
            throw std::invalid_argument("label_windows: trading days must be strictly increasing");
        }
    }
    WindowLabels out;
    out.is_pre.assign(trading_days.size(), 0);

    std::vector<Date> sorted(announcements.begin(), announcements.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::uint8_t> claimed(trading_days.size(), 0);
    for (const Date a : sorted) {
        const auto it = std::lower_bound(trading_days.begin(), trading_days.end(), a);
        if (it == trading_days.end()) {
            ++out.dropped;
            continue;
        }
        if (*it != a) ++out.snapped;
        const int ia = static_cast<int>(it - trading_days.begin());
        std::vector<int> window;
        // Open interval (t - delta, t): the delta - 1 trading days before t.
        for (int k = std::max(0, ia - (delta - 1)); k < ia; ++k) {
            out.is_pre[k] = 1;
            if (!claimed[k]) {
                claimed[k] = 1;
                window.push_back(k);
            }
        }
        out.windows.push_back(std::move(window));
    }
    return out;
}

BuildResult build_series(std::span<const Transaction> transactions,
                         const AnnouncementCalendar& calendar) {
    BuildResult out;
    if (transactions.empty()) return out;

    // Trading calendar: every date with at least one transaction.
    std::set<Date> day_set;
    for (const auto& tx : transactions) {
        if (tx.price <= 0.0 || tx.quantity <= 0.0) {
            throw std::invalid_argument("build_series: non-positive price or quantity");
        }
        day_set.insert(tx.date);
    }
    out.trading_days.assign(day_set.begin(), day_set.end());
    const auto& days = out.trading_days;
    const int n_days = static_cast<int>(days.size());

    // Median price of each security on each trading day.
    std::map<std::pair<int, Date>, std::vector<double>> prices;
    for (const auto& tx : transactions) prices[{tx.security_id, tx.date}].push_back(tx.price);
    auto median_price = [&](int security, Date d) -> std::optional<double> {
        const auto it = prices.find({security, d});
        if (it == prices.end()) return std::nullopt;
        auto v = it->second;
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };

    // Future price: first trading day >= t + 7 calendar days, searching
    // forward up to 10 trading days for a quote in the security.
    auto future_price = [&](const Transaction& tx) -> std::optional<double> {
        const auto it = std::lower_bound(days.begin(), days.end(), tx.date + 7);
        const int start = static_cast<int>(it - days.begin());
        for (int k = start; k < std::min(start + 10, n_days); ++k) {
            if (const auto p = median_price(tx.security_id, days[k])) return p;
        }
        return std::nullopt;
    };

    // Pre-window labels per company.
    std::map<int, WindowLabels> labels;
    for (const auto& [company, anns] : calendar.by_company) {
        labels[company] = label_windows(days, anns, calendar.delta);
        out.snapped_announcements += labels[company].snapped;
        out.dropped_announcements += labels[company].dropped;
    }
    auto day_is_pre = [&](int company, Date d) {
        const auto it = labels.find(company);
        if (it == labels.end()) return false;
        const auto pos = std::lower_bound(days.begin(), days.end(), d);
        return it->second.is_pre[static_cast<std::size_t>(pos - days.begin())] != 0;
    };

    // Aggregate per (agent, company, day).
    struct DayAccum {
        double weighted{0.0};
        double volume{0.0};
    };
    std::map<std::tuple<int, int, Date>, DayAccum> accum;
    for (const auto& tx : transactions) {
        const auto fp = future_price(tx);
        if (!fp) {
            ++out.skipped_no_future_price;
            continue;
        }
        const double r = transaction_return(tx, *fp);
        auto& acc = accum[{tx.agent_id, tx.company_id, tx.date}];
        acc.weighted += r * tx.volume();
        acc.volume += tx.volume();
    }

    std::map<std::pair<int, int>, AgentReturnSeries> grouped;
    for (const auto& [key, acc] : accum) {
        const auto [agent, company, date] = key;
        if (acc.volume == 0.0) continue;
        auto& s = grouped[{agent, company}];
        s.agent_id = agent;
        s.company_id = company;
        DailyPoint p;
        p.date = date;
        p.ret = acc.weighted / acc.volume;
        p.profit = acc.weighted;  // sum of return * volume over the day
        p.is_pre = day_is_pre(company, date);
        s.days.push_back(p);
    }
    for (auto& [key, s] : grouped) {
        std::sort(s.days.begin(), s.days.end(),
                  [](const DailyPoint& a, const DailyPoint& b) { return a.date < b.date; });
        out.series.push_back(std::move(s));
    }
    return out;
}

// ── CSV I/O ─────────────────────────────────────────────────────────────────

std::vector<Transaction> read_transactions_csv(const std::string& path) {
    const auto t = csv::read_file(path);
    const int ca = t.require_column("agent_id");
    const int cc = t.require_column("company_id");
    const int cs = t.require_column("security_id");
    const int cd = t.require_column("date");
    const int cside = t.require_column("side");
    const int cp = t.require_column("price");
    const int cq = t.require_column("quantity");
    std::vector<Transaction> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        Transaction tx;
        tx.agent_id = std::stoi(row[ca]);
        tx.company_id = std::stoi(row[cc]);
        tx.security_id = std::stoi(row[cs]);
        tx.date = parse_date(row[cd]);
        if (row[cside] == "buy") {
            tx.side = Side::Buy;
        } else if (row[cside] == "sell") {
            tx.side = Side::Sell;
        } else {
            throw std::runtime_error("read_transactions_csv: side must be buy or sell");
        }
        tx.price = std::stod(row[cp]);
        tx.quantity = std::stod(row[cq]);
        out.push_back(tx);
    }
    return out;
}

AnnouncementCalendar read_announcements_csv(const std::string& path, int delta) {
    const auto t = csv::read_file(path);
    const int cc = t.require_column("company_id");
    const int cd = t.require_column("date");
    AnnouncementCalendar cal;
    cal.delta = delta;
    for (const auto& row : t.rows) {
        cal.by_company[std::stoi(row[cc])].push_back(parse_date(row[cd]));
    }
    for (auto& [company, v] : cal.by_company) std::sort(v.begin(), v.end());
    return cal;
}

void write_series_csv(std::span<const AgentReturnSeries> series, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : series) {
        for (const auto& d : s.days) {
            rows.push_back({std::to_string(s.agent_id), std::to_string(s.company_id),
                            format_date(d.date), csv::format_double(d.ret),
                            csv::format_double(d.profit), d.is_pre ? "1" : "0"});
        }
    }
    csv::write_file(path, {"agent_id", "company_id", "date", "return", "profit", "is_pre"}, rows);
}

std::vector<AgentReturnSeries> read_series_csv(const std::string& path) {
    const auto t = csv::read_file(path);
    const int ca = t.require_column("agent_id");
    const int cc = t.require_column("company_id");
    const int cd = t.require_column("date");
    const int cr = t.require_column("return");
    const int cp = t.require_column("profit");
    const int cpre = t.require_column("is_pre");
    std::map<std::pair<int, int>, AgentReturnSeries> grouped;
    for (const auto& row : t.rows) {
        const int agent = std::stoi(row[ca]);
        const int company = std::stoi(row[cc]);
        auto& s = grouped[{agent, company}];
        s.agent_id = agent;
        s.company_id = company;
        DailyPoint p;
        p.date = parse_date(row[cd]);
        p.ret = std::stod(row[cr]);
        p.profit = std::stod(row[cp]);
        p.is_pre = row[cpre] == "1";
        s.days.push_back(p);
    }
    std::vector<AgentReturnSeries> out;
    out.reserve(grouped.size());
    for (auto& [key, s] : grouped) {
        std::sort(s.days.begin(), s.days.end(),
                  [](const DailyPoint& a, const DailyPoint& b) { return a.date < b.date; });
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace contagion::market_data
