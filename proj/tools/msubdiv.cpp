// msubdiv: convergence analysis of multiple subdivision schemes with
// level-dependent masks and dilation matrices.
//
// Exit codes: 0 success / convergent, 1 validation or pipeline failure,
// 2 parse error, 3 not convergent, 4 inconclusive.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "msubdiv/io.hpp"

namespace {

using namespace msubdiv;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitParse = 2;
constexpr int kExitNotConvergent = 3;
constexpr int kExitInconclusive = 4;

std::vector<size_t> parse_sequence(const std::string& text, size_t op_count) {
    std::vector<size_t> word;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        long v = std::stol(cur);
        if (v < 1 || size_t(v) > op_count)
            throw std::invalid_argument("sequence index " + cur + " out of range 1.." +
                                        std::to_string(op_count));
        word.push_back(size_t(v) - 1);
        cur.clear();
    };
    for (char c : text) {
        if (c == ',' || c == ' ') {
            flush();
        } else if (c >= '0' && c <= '9') {
            cur.push_back(c);
        } else {
            throw std::invalid_argument("malformed sequence \"" + text + "\"");
        }
    }
    flush();
    if (word.empty()) throw std::invalid_argument("empty sequence");
    return word;
}

std::vector<size_t> extend_word(std::vector<size_t> word, const std::vector<size_t>& tail,
                                size_t length) {
    const std::vector<size_t>& cycle = tail.empty() ? word : tail;
    size_t i = 0;
    while (word.size() < length) {
        word.push_back(cycle[i % cycle.size()]);
        ++i;
    }
    word.resize(length);
    return word;
}

LatticeSet parse_seed(const std::string& text, int dim) {
    // "(1,2);(3,4)" or "(5)"
    std::vector<Point> pts;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t open = text.find('(', pos);
        if (open == std::string::npos) break;
        size_t close = text.find(')', open);
        if (close == std::string::npos) throw std::invalid_argument("unbalanced seed point");
        Point p;
        std::string body = text.substr(open + 1, close - open - 1);
        std::string cur;
        for (char c : body + ",") {
            if (c == ',') {
                if (!cur.empty()) p.push_back(std::stoll(cur));
                cur.clear();
            } else if (c == '-' || (c >= '0' && c <= '9')) {
                cur.push_back(c);
            } else if (c != ' ') {
                throw std::invalid_argument("malformed seed point");
            }
        }
        if (int(p.size()) != dim) throw std::invalid_argument("seed point dimension mismatch");
        pts.push_back(std::move(p));
        pos = close + 1;
    }
    if (pts.empty()) throw std::invalid_argument("empty seed");
    return LatticeSet(dim, std::move(pts));
}

RasterSpec parse_raster(const std::string& size_text, const std::string& bbox_text) {
    RasterSpec spec;
    if (std::sscanf(size_text.c_str(), "%dx%d", &spec.width, &spec.height) != 2)
        throw std::invalid_argument("raster size must look like 640x480");
    if (std::sscanf(bbox_text.c_str(), "%lf,%lf,%lf,%lf", &spec.xmin, &spec.xmax, &spec.ymin,
                    &spec.ymax) != 4)
        throw std::invalid_argument("bbox must look like xmin,xmax,ymin,ymax");
    return spec;
}

void emit(const std::string& path, const std::string& content, bool binary = false) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        write_file(path, content, binary);
}

struct CommonArgs {
    std::string file;
    int threads = 1;
};

int run_validate(const CommonArgs& args) {
    SchemeSet s = load_scheme_file(args.file);
    bool ok = true;
    std::printf("dimension: %d, operators: %zu\n", s.dim(), s.count());
    for (const auto& op : s.ops) {
        auto sr = check_sum_rules(op);
        std::printf("[%s] digits: %zu (verified), sum rules: %s\n", op.label.c_str(),
                    op.digits.size(), sr.ok ? "ok" : "VIOLATED");
        for (const auto& [d, res] : sr.residuals)
            if (!res.is_zero())
                std::printf("  coset %s residual %s\n", point_str(d).c_str(), res.str().c_str());
        if (!sr.ok) ok = false;
        if (!op.mask.origin_in_support())
            std::printf("  warning: 0 not in supp(a); downstream index sets follow the mask as given\n");
    }
    auto exp = check_jointly_expanding(s);
    const char* verdict = exp.verdict == Expansion::certified_yes
                              ? "certified-yes"
                              : (exp.verdict == Expansion::certified_no ? "certified-no"
                                                                        : "inconclusive");
    std::printf("jointly expanding: %s (depth %d)\n", verdict, exp.depth);
    if (exp.verdict == Expansion::certified_no) ok = false;
    std::printf("assumption N (norm2 of inverse dilations):\n");
    for (const auto& e : check_assumption_n(s))
        std::printf("  [%s] %.6f  %s\n", e.label.c_str(), e.norm2, e.ok ? "ok" : "fails");
    return ok ? kExitOk : kExitValidation;
}

int run_omega(const CommonArgs& args, const std::string& seed_text, const std::string& policy,
              const std::string& out) {
    SchemeSet s = load_scheme_file(args.file);
    OmegaSet omega{LatticeSet(s.dim()), OmegaProvenance::user, LatticeSet(s.dim())};
    if (policy == "auto") {
        omega = select_omega(s);
    } else if (policy == "ball") {
        omega = construct_omega_v(s);
    } else if (policy == "c") {
        LatticeSet seed =
            seed_text.empty() ? LatticeSet::origin(s.dim()) : parse_seed(seed_text, s.dim());
        omega = construct_omega_c(s, seed);
    } else {
        throw std::invalid_argument("unknown omega policy: " + policy);
    }
    auto rep = difference_space_report(omega.points);
    std::printf("omega: %zu points (%s)\n", omega.points.size(), to_string(omega.provenance));
    std::printf("dimV: %d, dimVtilde: %d, components: %d\n", rep.dimV, rep.dimVtilde,
                rep.components);
    if (rep.components > 1)
        for (const auto& comp : rep.component_points)
            if (comp.size() == 1)
                std::printf("isolated point: %s\n", point_str(comp.front()).c_str());
    emit(out, omega_to_csv(omega.points));
    return kExitOk;
}

int run_transition(const CommonArgs& args, const std::string& policy, const std::string& out) {
    SchemeSet s = load_scheme_file(args.file);
    OmegaSet omega = policy == "auto" ? select_omega(s) : construct_omega_c(s);
    auto family = build_transition_matrices(s, omega.points);
    emit(out, transition_to_json(family).dump(2) + "\n");
    return kExitOk;
}

JsrBudget make_budget(int max_depth, int threads) {
    JsrBudget b;
    if (max_depth > 0) {
        b.lower_max_len = max_depth;
        b.upper_max_len = std::max(max_depth, 8);
    }
    b.threads = threads;
    return b;
}

int run_jsr(const CommonArgs& args, int max_depth, const std::string& method,
            const std::string& out) {
    SchemeSet s = load_scheme_file(args.file);
    OmegaSet omega = select_omega(s);
    auto rep = difference_space_report(omega.points);
    auto family = build_transition_matrices(s, omega.points);
    RestrictedFamily rf = omega.points.size() == 1 ? restrict_star_basis(family)
                                                   : restrict_to_difference_space(family, rep);
    MatrixFamily mf = to_matrix_family(rf);
    JsrBudget budget = make_budget(max_depth, args.threads);
    if (method == "bracket") budget.polytope_max_vertices = 0;
    JsrEstimate est = jsr_estimate(mf, budget);
    emit(out, estimate_to_json(est, family_keys(rf)).dump(2) + "\n");
    return kExitOk;
}

int run_convergence(const CommonArgs& args, int max_depth, const std::string& method,
                    const std::string& out) {
    SchemeSet s = load_scheme_file(args.file);
    AnalysisBudget budget;
    budget.jsr = make_budget(max_depth, args.threads);
    if (method == "bracket") budget.jsr.polytope_max_vertices = 0;
    ConvergenceReport rep = analyze_convergence(s, budget);
    FamilyKeys keys;  // spell out the certificate word
    if (rep.jsr_ran) {
        auto family = build_transition_matrices(
            rep.power_n > 1 ? power_scheme_set(s, rep.power_n) : s, rep.omega.points);
        for (const auto& t : family) keys.emplace_back(t.op_label, t.digit);
    }
    emit(out, report_to_json(rep, keys).dump(2) + "\n");
    switch (rep.verdict) {
        case Verdict::convergent: return kExitOk;
        case Verdict::not_convergent: return kExitNotConvergent;
        case Verdict::inconclusive: return kExitInconclusive;
    }
    return kExitInconclusive;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"convergence analysis of multiple subdivision schemes"};
    app.require_subcommand(1);

    CommonArgs args;
    if (const char* env = std::getenv("MSUBDIV_THREADS")) args.threads = std::max(1, std::atoi(env));
    std::string seed_text, policy = "c", method = "auto", out, sequence, tail_text, bbox, raster,
                raster_out;
    int max_depth = 0, depth = 10, iterations = 9, shift = 1, decay_n = 12;
    size_t budget_points = 200000;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("file", args.file, "scheme JSON file")->required();
        cmd->add_option("--threads", args.threads, "worker threads for the JSR word search");
    };

    auto* c_validate = app.add_subcommand("validate", "check sum rules, digits and expansion");
    add_common(c_validate);

    auto* c_omega = app.add_subcommand("omega", "construct an invariant index set");
    add_common(c_omega);
    c_omega->add_option("--seed", seed_text, "seed points, e.g. \"(0);(5)\"");
    c_omega->add_option("--policy", policy, "c | auto | ball (default c)");
    c_omega->add_option("--out", out, "CSV output path (default stdout)");

    auto* c_transition = app.add_subcommand("transition", "dump transition matrices as JSON");
    add_common(c_transition);
    c_transition->add_option("--policy", policy, "c | auto (default c)");
    c_transition->add_option("--out", out, "output path (default stdout)");

    auto* c_jsr = app.add_subcommand("jsr", "bracket the JSR of the restricted family");
    add_common(c_jsr);
    c_jsr->add_option("--max-depth", max_depth, "word length budget");
    c_jsr->add_option("--method", method, "auto | bracket (bracket disables the polytope)");
    c_jsr->add_option("--out", out, "output path (default stdout)");

    auto* c_conv = app.add_subcommand("convergence", "full convergence analysis");
    add_common(c_conv);
    c_conv->add_option("--max-depth", max_depth, "word length budget");
    c_conv->add_option("--method", method, "auto | bracket");
    c_conv->add_option("--out", out, "report output path (default stdout)");

    auto* c_attr = app.add_subcommand("attractor", "truncated digit-expansion point cloud");
    add_common(c_attr);
    c_attr->add_option("--sequence", sequence, "operator indices, e.g. \"1,2,2\"")->required();
    c_attr->add_option("--tail", tail_text, "cyclic continuation (default: cycle the sequence)");
    c_attr->add_option("--depth", depth, "truncation depth");
    c_attr->add_option("--budget", budget_points, "point budget before decimation");
    c_attr->add_option("--out", out, "CSV output path (default stdout)");
    c_attr->add_option("--raster", raster, "WxH raster size");
    c_attr->add_option("--bbox", bbox, "xmin,xmax,ymin,ymax");
    c_attr->add_option("--raster-out", raster_out, "PGM output path");

    auto* c_blf = app.add_subcommand("blf", "basic-limit-function support cloud");
    add_common(c_blf);
    c_blf->add_option("--sequence", sequence, "operator indices, e.g. \"1,2,2,...\"")->required();
    c_blf->add_option("--tail", tail_text, "cyclic continuation (default: cycle the sequence)");
    c_blf->add_option("--iterations", iterations, "number of subdivision steps");
    c_blf->add_option("--shift", shift, "1-based shift into the word");
    c_blf->add_option("--out", out, "CSV output path (default stdout)");
    c_blf->add_option("--raster", raster, "WxH raster size");
    c_blf->add_option("--bbox", bbox, "xmin,xmax,ymin,ymax");
    c_blf->add_option("--raster-out", raster_out, "PGM output path");

    auto* c_decay = app.add_subcommand("decay", "difference decay table along a word");
    add_common(c_decay);
    c_decay->add_option("--sequence", sequence, "operator indices")->required();
    c_decay->add_option("--tail", tail_text, "cyclic continuation (default: cycle the sequence)");
    c_decay->add_option("-n", decay_n, "number of steps");
    c_decay->add_option("--out", out, "table output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitParse;
    }

    try {
        if (c_validate->parsed()) return run_validate(args);
        if (c_omega->parsed()) return run_omega(args, seed_text, policy, out);
        if (c_transition->parsed()) return run_transition(args, policy, out);
        if (c_jsr->parsed()) return run_jsr(args, max_depth, method, out);
        if (c_conv->parsed()) return run_convergence(args, max_depth, method, out);

        SchemeSet s = load_scheme_file(args.file);
        std::vector<size_t> base = parse_sequence(sequence, s.count());
        std::vector<size_t> tail =
            tail_text.empty() ? std::vector<size_t>{} : parse_sequence(tail_text, s.count());
        if (c_attr->parsed()) {
            auto word = extend_word(base, tail, size_t(depth));
            PointCloud pc = attractor_points(s, word, budget_points);
            if (pc.subsampled) std::fprintf(stderr, "note: cloud decimated to the point budget\n");
            emit(out, cloud_to_csv(pc));
            if (!raster.empty()) {
                if (s.dim() > 2) throw std::invalid_argument("raster output needs dimension <= 2");
                emit(raster_out, rasterize_pgm(pc, parse_raster(raster, bbox)), true);
            }
            return kExitOk;
        }
        if (c_blf->parsed()) {
            auto word = extend_word(base, tail, size_t(shift - 1 + iterations));
            PointCloud pc = blf_support(s, word, shift);
            emit(out, cloud_to_csv(pc));
            if (!raster.empty()) {
                if (s.dim() > 2) throw std::invalid_argument("raster output needs dimension <= 2");
                emit(raster_out, rasterize_pgm(pc, parse_raster(raster, bbox)), true);
            }
            return kExitOk;
        }
        if (c_decay->parsed()) {
            auto word = extend_word(base, tail, size_t(decay_n));
            auto table = difference_decay(s, word);
            std::string text = "n,m_n,m_n^(1/n)\n";
            for (const auto& [n, m] : table) {
                double root = n > 0 ? std::pow(m.to_double(), 1.0 / n) : m.to_double();
                text += std::to_string(n) + "," + m.str() + "," + detail::fmt_double(root) + "\n";
            }
            emit(out, text);
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::string what = e.what();
        std::fprintf(stderr, "error: %s\n", what.c_str());
        // scheme-file syntax and schema violations are parse errors
        return what.rfind("scheme file:", 0) == 0 ||
                       what.find("cannot open scheme file") != std::string::npos
                   ? kExitParse
                   : kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }
    return kExitValidation;
}
