#include "sscycle/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "sscycle/coupling.hpp"

namespace sscycle {

double ExperimentSpec::lazy_parameter(int n) const {
    switch (schedule) {
        case Schedule::ConstantP:
            return p_const;
        case Schedule::LogLambda: {
            double lam = std::log(static_cast<double>(n));
            return lam / (1.0 + lam);
        }
        case Schedule::Table: {
            auto it = p_table.find(n);
            if (it == p_table.end())
                throw InvalidSpecError("schedule table has no entry for n = " + std::to_string(n));
            return it->second;
        }
    }
    throw InvalidSpecError("unknown schedule");
}

void ExperimentSpec::validate() const {
    if (n_grid.empty()) throw InvalidSpecError("n_grid is empty");
    if (trials < 1) throw InvalidSpecError("trials must be >= 1");
    if (cap_factor < 1) throw InvalidSpecError("cap_factor must be >= 1");
    for (int n : n_grid) {
        if (n < 2) throw InvalidSpecError("ring size must be >= 2");
        double p = lazy_parameter(n);
        if (!(p > 0.0 && p < 1.0))
            throw InvalidSpecError("lazy parameter out of (0,1) at n = " + std::to_string(n));
    }
}

std::string schedule_name(Schedule s) {
    switch (s) {
        case Schedule::ConstantP: return "constant-p";
        case Schedule::LogLambda: return "log-lambda";
        case Schedule::Table: return "table";
    }
    return "?";
}

Schedule schedule_from_name(const std::string& name) {
    if (name == "constant-p") return Schedule::ConstantP;
    if (name == "log-lambda") return Schedule::LogLambda;
    if (name == "table") return Schedule::Table;
    throw InvalidSpecError("unknown schedule '" + name + "'");
}

std::uint64_t derive_trial_seed(std::uint64_t master_seed, int n, int trial) {
    return detail::mix64(detail::mix64(master_seed ^ detail::mix64(static_cast<std::uint64_t>(n))) +
                         static_cast<std::uint64_t>(trial));
}

SandpileConfig initial_config(InitKind init, int n, std::uint64_t trial_seed) {
    if (init == InitKind::Point) return SandpileConfig::point(n);
    SandpileConfig s;
    s.counts.assign(n, 0);
    std::mt19937_64 prng(trial_seed ^ 0xA5A5A5A5A5A5A5A5ULL);
    std::uniform_int_distribution<int> site(0, n - 1);
    for (int k = 0; k < n; ++k) ++s.counts[site(prng)];
    return s;
}

namespace {

ArwConfig activate(const SandpileConfig& s) {
    ArwConfig eta;
    eta.values.reserve(s.size());
    for (int c : s.counts) eta.values.push_back(NsValue::active(c));
    return eta;
}

RunRecord run_one(const ExperimentSpec& spec, int n, int trial) {
    RunRecord rec;
    rec.n = n;
    rec.schedule = schedule_name(spec.schedule);
    rec.trial = trial;
    rec.seed = derive_trial_seed(spec.master_seed, n, trial);
    rec.p = spec.lazy_parameter(n);
    rec.lambda = rec.p / (1.0 - rec.p);

    const std::uint64_t cap =
        spec.cap_factor * static_cast<std::uint64_t>(n) * n * n;
    InstructionField field{rec.seed, n, rec.p, rec.lambda};
    SandpileConfig s0 = initial_config(spec.init, n, rec.seed);

    switch (spec.model) {
        case ModelKind::SS: {
            FastResult r = stabilize_ss_fast(s0, field, cap);
            rec.topplings = r.topplings;
            rec.capped = r.capped;
            break;
        }
        case ModelKind::ARW: {
            FastResult r = stabilize_arw_fast(activate(s0), field, cap);
            rec.topplings = r.topplings;
            rec.capped = r.capped;
            break;
        }
        case ModelKind::Coupled: {
            try {
                CoupledRun run = run_coupled(activate(s0), field, cap);
                rec.topplings = run.t_arw;
            } catch (const CapExceededError&) {
                rec.capped = true;
            }
            break;
        }
    }
    return rec;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, int workers) {
    spec.validate();
    if (workers <= 0) workers = std::max(1u, std::thread::hardware_concurrency());

    struct Job {
        int n;
        int trial;
    };
    std::vector<Job> jobs;
    for (int n : spec.n_grid)
        for (int trial = 0; trial < spec.trials; ++trial) jobs.push_back({n, trial});

    std::vector<RunRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            records[i] = run_one(spec, jobs[i].n, jobs[i].trial);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return records;
}

FitResult fit_loglog(const std::vector<RunRecord>& records) {
    std::map<int, std::pair<double, std::uint64_t>> by_n;  // n -> (sum T, count), uncapped only
    for (const auto& rec : records) {
        if (rec.capped) continue;
        auto& acc = by_n[rec.n];
        acc.first += static_cast<double>(rec.topplings);
        acc.second += 1;
    }
    std::vector<double> xs, ys;
    for (const auto& [n, acc] : by_n) {
        if (acc.second == 0) continue;
        double mean = acc.first / static_cast<double>(acc.second);
        if (mean <= 0) continue;
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(mean));
    }
    if (xs.size() < 3)
        throw InsufficientDataError("log-log fit needs >= 3 distinct n with uncapped records");

    const double count = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    FitResult fit;
    fit.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / count;
    double ss_res = 0, ss_tot = 0, mean_y = sy / count;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double resid = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += resid * resid;
        ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string records_to_csv(const std::vector<RunRecord>& records) {
    std::string out = "n,schedule,p,lambda,trial,seed,T,capped\n";
    for (const auto& r : records) {
        out += std::to_string(r.n) + ',' + r.schedule + ',' + format_double(r.p) + ',' +
               format_double(r.lambda) + ',' + std::to_string(r.trial) + ',' +
               std::to_string(r.seed) + ',' + std::to_string(r.topplings) + ',' +
               (r.capped ? "1" : "0") + '\n';
    }
    return out;
}

std::vector<RunRecord> records_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "n,schedule,p,lambda,trial,seed,T,capped")
        throw InvalidSpecError("bad CSV header");
    std::vector<RunRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        RunRecord r;
        try {
            std::getline(ls, field, ','); r.n = std::stoi(field);
            std::getline(ls, r.schedule, ',');
            std::getline(ls, field, ','); r.p = std::stod(field);
            std::getline(ls, field, ','); r.lambda = std::stod(field);
            std::getline(ls, field, ','); r.trial = std::stoi(field);
            std::getline(ls, field, ','); r.seed = std::stoull(field);
            std::getline(ls, field, ','); r.topplings = std::stoull(field);
            if (!std::getline(ls, field, ',')) throw InvalidSpecError("short CSV row");
            r.capped = field == "1";
        } catch (const std::logic_error&) {
            throw InvalidSpecError("bad CSV row: " + line);
        }
        records.push_back(std::move(r));
    }
    return records;
}

void write_csv_file(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path);
    if (!out) throw InvalidSpecError("cannot open for writing: " + path);
    out << records_to_csv(records);
    if (!out) throw InvalidSpecError("write failed: " + path);
}

std::vector<RunRecord> read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpecError("cannot open: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return records_from_csv(buf.str());
}

std::vector<PlotSeries> build_plot_series(const std::vector<RunRecord>& records) {
    static const char* kColors[] = {"#1f4fd8", "#d81f1f", "#1fa846", "#a81fd8"};
    std::map<std::string, std::vector<RunRecord>> groups;
    for (const auto& r : records) groups[r.schedule].push_back(r);

    std::vector<PlotSeries> series;
    int color_index = 0;
    for (auto& [name, group] : groups) {
        PlotSeries s;
        s.name = name;
        s.color = kColors[color_index++ % 4];
        std::map<int, std::pair<double, std::uint64_t>> by_n;
        for (const auto& r : group) {
            if (r.capped) continue;
            by_n[r.n].first += static_cast<double>(r.topplings);
            by_n[r.n].second += 1;
        }
        for (const auto& [n, acc] : by_n)
            if (acc.second > 0)
                s.points.emplace_back(n, acc.first / static_cast<double>(acc.second));
        s.fit = fit_loglog(group);
        series.push_back(std::move(s));
    }
    return series;
}

std::string render_svg(const std::vector<PlotSeries>& series) {
    const int width = 640, height = 480;
    const int ml = 70, mr = 20, mt = 30, mb = 50;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (const auto& [n, t] : s.points) {
            xmin = std::min(xmin, std::log(n));
            xmax = std::max(xmax, std::log(n));
            ymin = std::min(ymin, std::log(t));
            ymax = std::max(ymax, std::log(t));
        }
    }
    if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double ly) { return height - mb - (ly - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">ln n</text>\n"
        << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
        << (mt + height - mb) / 2 << ")\">ln mean T</text>\n";

    int label_row = 0;
    for (const auto& s : series) {
        // fitted line across the x range
        double y0 = s.fit.intercept + s.fit.slope * xmin;
        double y1 = s.fit.intercept + s.fit.slope * xmax;
        svg << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(xmax)
            << "\" y2=\"" << py(y1) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"/>\n";
        for (const auto& [n, t] : s.points)
            svg << "<circle cx=\"" << px(std::log(n)) << "\" cy=\"" << py(std::log(t))
                << "\" r=\"4\" fill=\"" << s.color << "\"/>\n";
        char label[128];
        std::snprintf(label, sizeof label, "%s: slope %.3f (R2 %.4f)", s.name.c_str(), s.fit.slope,
                      s.fit.r_squared);
        svg << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 18 * label_row++
            << "\" font-size=\"13\" fill=\"" << s.color << "\">" << label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_svg_file(const std::string& path, const std::vector<PlotSeries>& series) {
    std::ofstream out(path);
    if (!out) throw InvalidSpecError("cannot open for writing: " + path);
    out << render_svg(series);
    if (!out) throw InvalidSpecError("write failed: " + path);
}

double slow_phase_proxy(int n, double p) {
    return std::log(static_cast<double>(n)) * (1.0 - p);
}

}  // namespace sscycle
