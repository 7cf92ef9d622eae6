#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tokescale/errors.hpp"
#include "tokescale/isoflop.hpp"
#include "tokescale/json_io.hpp"
#include "tokescale/law1.hpp"
#include "tokescale/law2.hpp"
#include "tokescale/multilingual.hpp"
#include "tokescale/optimizer.hpp"
#include "tokescale/recipes.hpp"
#include "tokescale/records.hpp"
#include "tokescale/synth.hpp"

namespace py = pybind11;
namespace ts = tokescale;

namespace {

ts::RecordFormat format_from_name(const std::string& name) {
    if (name == "csv") return ts::RecordFormat::Csv;
    if (name == "jsonl") return ts::RecordFormat::Jsonl;
    throw ts::DomainError("format must be 'csv' or 'jsonl'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Compression-aware scaling-law analysis: IsoFLOP fitting, "
              "scaling laws I/II, FLOPs accounting, parity.";

    py::register_exception<ts::InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ts::NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::enum_<ts::Family>(m, "Family")
        .value("LATENT_ENTROPY", ts::Family::LatentEntropy)
        .value("LATENT_FIXED", ts::Family::LatentFixed)
        .value("SUBWORD", ts::Family::Subword);

    py::enum_<ts::ResidualVariant>(m, "ResidualVariant")
        .value("MEAN", ts::ResidualVariant::Mean)
        .value("CONST_T", ts::ResidualVariant::ConstT)
        .value("COMPUTE_T", ts::ResidualVariant::ComputeT);

    py::class_<ts::RunRecord>(m, "RunRecord")
        .def(py::init<>())
        .def_readwrite("family", &ts::RunRecord::family)
        .def_readwrite("budget_flops", &ts::RunRecord::budget_flops)
        .def_readwrite("compression", &ts::RunRecord::compression)
        .def_readwrite("scale", &ts::RunRecord::scale)
        .def_readwrite("latent_params", &ts::RunRecord::latent_params)
        .def_readwrite("total_params", &ts::RunRecord::total_params)
        .def_readwrite("bytes", &ts::RunRecord::bytes)
        .def_readwrite("loss_bpb", &ts::RunRecord::loss_bpb)
        .def_readwrite("language", &ts::RunRecord::language)
        .def_readwrite("dataset", &ts::RunRecord::dataset)
        .def("__repr__", [](const ts::RunRecord& r) {
            std::ostringstream out;
            out << "RunRecord(family=" << ts::to_string(r.family) << ", C=" << r.budget_flops
                << ", T=" << r.compression << ", N=" << r.latent_params << ", B=" << r.bytes
                << ", L=" << r.loss_bpb << ")";
            return out.str();
        });

    py::class_<ts::GridReport>(m, "GridReport")
        .def_readonly("n_records", &ts::GridReport::n_records)
        .def_readonly("budgets", &ts::GridReport::budgets)
        .def_readonly("compressions", &ts::GridReport::compressions)
        .def_readonly("max_flops_discrepancy", &ts::GridReport::max_flops_discrepancy)
        .def_readonly("offending_records", &ts::GridReport::offending_records);

    m.def(
        "parse_runs",
        [](const std::string& text, const std::string& format) {
            return ts::parse_runs(text, format_from_name(format));
        },
        py::arg("text"), py::arg("format") = "csv");
    m.def(
        "serialize_runs",
        [](const std::vector<ts::RunRecord>& records, const std::string& format) {
            return ts::serialize_runs(records, format_from_name(format));
        },
        py::arg("records"), py::arg("format") = "csv");
    m.def("validate_grid", &ts::validate_grid, py::arg("records"), py::arg("tolerance"));
    m.def("bpb_from_nats", &ts::bpb_from_nats, py::arg("total_nll_nats"), py::arg("n_bytes"));

    py::class_<ts::ArchRecipe>(m, "ArchRecipe")
        .def_readonly("family", &ts::ArchRecipe::family)
        .def_readonly("scale", &ts::ArchRecipe::scale)
        .def_readonly("global_layers", &ts::ArchRecipe::global_layers)
        .def_readonly("global_heads", &ts::ArchRecipe::global_heads)
        .def_readonly("global_dim", &ts::ArchRecipe::global_dim)
        .def_readonly("local_layers", &ts::ArchRecipe::local_layers)
        .def_readonly("local_heads", &ts::ArchRecipe::local_heads)
        .def_readonly("local_dim", &ts::ArchRecipe::local_dim)
        .def_readonly("crossattn_k", &ts::ArchRecipe::crossattn_k)
        .def_readonly("vocab_size", &ts::ArchRecipe::vocab_size)
        .def_readonly("params_global", &ts::ArchRecipe::params_global)
        .def_readonly("params_local", &ts::ArchRecipe::params_local)
        .def_readonly("params_cross", &ts::ArchRecipe::params_cross)
        .def_readonly("params_total", &ts::ArchRecipe::params_total);

    py::class_<ts::FlopsBreakdown>(m, "FlopsBreakdown")
        .def_readonly("global_per_byte", &ts::FlopsBreakdown::global_per_byte)
        .def_readonly("local_per_byte", &ts::FlopsBreakdown::local_per_byte)
        .def_readonly("cross_per_byte", &ts::FlopsBreakdown::cross_per_byte)
        .def_readonly("total_per_byte", &ts::FlopsBreakdown::total_per_byte)
        .def_readonly("global_share", &ts::FlopsBreakdown::global_share)
        .def_readonly("context_bytes", &ts::FlopsBreakdown::context_bytes)
        .def_readonly("attention_included", &ts::FlopsBreakdown::attention_included);

    py::class_<ts::BudgetAllocation>(m, "BudgetAllocation")
        .def_readonly("bytes", &ts::BudgetAllocation::bytes)
        .def_readonly("bytes_per_param", &ts::BudgetAllocation::bytes_per_param);

    m.def("latent_recipe", &ts::latent_recipe, py::arg("scale"),
          py::arg("family") = ts::Family::LatentEntropy);
    m.def("subword_recipe", &ts::subword_recipe, py::arg("scale"), py::arg("vocab_size"));
    m.def("count_global_params", &ts::count_global_params, py::arg("scale"));
    m.def("approx_compute", &ts::approx_compute, py::arg("latent_params"), py::arg("bytes"),
          py::arg("compression"));
    m.def("bytes_for_budget", &ts::bytes_for_budget, py::arg("budget"), py::arg("latent_params"),
          py::arg("compression"));
    m.def("inference_flops_per_byte", &ts::inference_flops_per_byte, py::arg("recipe"),
          py::arg("compression"), py::arg("context_bytes") = ts::kDefaultContextBytes,
          py::arg("include_attention") = true,
          py::arg("local_window_bytes") = ts::kDefaultLocalWindowBytes);
    m.def("training_flops", &ts::training_flops, py::arg("recipe"), py::arg("bytes"),
          py::arg("compression"), py::arg("context_bytes") = ts::kDefaultContextBytes,
          py::arg("include_attention") = true,
          py::arg("local_window_bytes") = ts::kDefaultLocalWindowBytes);

    py::class_<ts::Isoflop2D>(m, "Isoflop2D")
        .def_readonly("budget", &ts::Isoflop2D::budget)
        .def_readonly("compression", &ts::Isoflop2D::compression)
        .def_readonly("a", &ts::Isoflop2D::a)
        .def_readonly("b", &ts::Isoflop2D::b)
        .def_readonly("c", &ts::Isoflop2D::c)
        .def_readonly("opt_log_bytes", &ts::Isoflop2D::opt_log_bytes)
        .def_readonly("opt_bytes", &ts::Isoflop2D::opt_bytes)
        .def_readonly("opt_loss", &ts::Isoflop2D::opt_loss)
        .def_readonly("opt_params", &ts::Isoflop2D::opt_params)
        .def_readonly("opt_bpp", &ts::Isoflop2D::opt_bpp)
        .def_readonly("n_points", &ts::Isoflop2D::n_points)
        .def_readonly("rmse", &ts::Isoflop2D::rmse)
        .def_readonly("vertex_outside_span", &ts::Isoflop2D::vertex_outside_span)
        .def_readonly("language", &ts::Isoflop2D::language);

    py::class_<ts::Isoflop3D>(m, "Isoflop3D")
        .def_readonly("budget", &ts::Isoflop3D::budget)
        .def_readonly("coeffs", &ts::Isoflop3D::coeffs)
        .def_readonly("opt_compression", &ts::Isoflop3D::opt_compression)
        .def_readonly("opt_bpp", &ts::Isoflop3D::opt_bpp)
        .def_readonly("opt_loss", &ts::Isoflop3D::opt_loss)
        .def_readonly("hessian_pd", &ts::Isoflop3D::hessian_pd)
        .def_readonly("n_points", &ts::Isoflop3D::n_points)
        .def_readonly("rmse", &ts::Isoflop3D::rmse)
        .def_readonly("language", &ts::Isoflop3D::language)
        .def("evaluate", &ts::Isoflop3D::evaluate, py::arg("compression"),
             py::arg("bytes_per_param"));

    py::class_<ts::Interpolated>(m, "Interpolated")
        .def_readonly("params", &ts::Interpolated::params)
        .def_readonly("extrapolated", &ts::Interpolated::extrapolated);

    m.def(
        "fit_parabola",
        [](const std::vector<std::pair<double, double>>& points, double budget, double compression) {
            std::vector<ts::BytesLoss> pts;
            for (const auto& [b, l] : points) pts.push_back({b, l});
            return ts::fit_parabola(pts, budget, compression);
        },
        py::arg("points"), py::arg("budget"), py::arg("compression"));
    m.def(
        "interpolate_params",
        [](double target_bytes, const std::vector<std::pair<double, double>>& grid) {
            std::vector<ts::BytesParams> g;
            for (const auto& [b, n] : grid) g.push_back({b, n});
            return ts::interpolate_params(target_bytes, g);
        },
        py::arg("target_bytes"), py::arg("grid"));
    m.def(
        "fit_paraboloid",
        [](const std::vector<std::tuple<double, double, double>>& points, double budget) {
            std::vector<ts::CompressionBppLoss> pts;
            for (const auto& [t, rho, l] : points) pts.push_back({t, rho, l});
            return ts::fit_paraboloid(pts, budget);
        },
        py::arg("points"), py::arg("budget"));
    m.def("fit_cells", &ts::fit_cells, py::arg("records"));
    m.def("fit_surfaces", &ts::fit_surfaces, py::arg("records"));

    py::class_<ts::FitDiagnostics>(m, "FitDiagnostics")
        .def_readonly("rmse", &ts::FitDiagnostics::rmse)
        .def_readonly("r2", &ts::FitDiagnostics::r2)
        .def_readonly("adj_r2", &ts::FitDiagnostics::adj_r2)
        .def_readonly("n", &ts::FitDiagnostics::n)
        .def_readonly("p", &ts::FitDiagnostics::p);

    py::class_<ts::ConfidenceInterval>(m, "ConfidenceInterval")
        .def_readonly("estimate", &ts::ConfidenceInterval::estimate)
        .def_readonly("low", &ts::ConfidenceInterval::low)
        .def_readonly("high", &ts::ConfidenceInterval::high)
        .def_readonly("level", &ts::ConfidenceInterval::level)
        .def_readonly("std_error", &ts::ConfidenceInterval::std_error);

    m.def("t_quantile", &ts::t_quantile, py::arg("two_sided_level"), py::arg("dof"));
    m.def(
        "ols_loglog",
        [](const std::vector<std::vector<double>>& inputs, const std::vector<double>& targets) {
            ts::OlsLogLog fit = ts::ols_loglog(inputs, targets);
            return py::make_tuple(fit.log_const, fit.exponents);
        },
        py::arg("inputs"), py::arg("targets"));
    m.def(
        "numerical_hessian",
        [](const std::function<double(std::vector<double>)>& objective,
           const std::vector<double>& theta, double step) {
            return ts::numerical_hessian([&objective](const std::vector<double>& x) { return objective(x); },
                                         theta, step);
        },
        py::arg("objective"), py::arg("theta"), py::arg("step") = ts::kHessianStep);

    py::class_<ts::OptimumPoint>(m, "OptimumPoint")
        .def(py::init([](double budget, double compression, double opt_bytes) {
                 return ts::OptimumPoint{budget, compression, opt_bytes};
             }),
             py::arg("budget"), py::arg("compression"), py::arg("opt_bytes"))
        .def_readwrite("budget", &ts::OptimumPoint::budget)
        .def_readwrite("compression", &ts::OptimumPoint::compression)
        .def_readwrite("opt_bytes", &ts::OptimumPoint::opt_bytes);

    py::class_<ts::LawOneParams>(m, "LawOneParams")
        .def_readonly("b0", &ts::LawOneParams::b0)
        .def_readonly("alpha", &ts::LawOneParams::alpha)
        .def_readonly("beta", &ts::LawOneParams::beta)
        .def_readonly("n0", &ts::LawOneParams::n0)
        .def_readonly("family", &ts::LawOneParams::family)
        .def_readonly("intervals", &ts::LawOneParams::intervals)
        .def_readonly("diagnostics", &ts::LawOneParams::diagnostics);

    m.def(
        "fit_law1",
        [](const std::vector<std::tuple<double, double, double>>& optima, ts::Family family,
           std::size_t max_starts, bool with_intervals) {
            std::vector<ts::OptimumPoint> pts;
            for (const auto& [c, t, b] : optima) pts.push_back({c, t, b});
            ts::LawOneOptions options;
            options.family = family;
            options.max_starts = max_starts;
            options.with_intervals = with_intervals;
            return ts::fit_law1(pts, options);
        },
        py::arg("optima"), py::arg("family") = ts::Family::LatentEntropy,
        py::arg("max_starts") = ts::kDefaultMaxStarts, py::arg("with_intervals") = true);
    m.def("predict_data", &ts::predict_data, py::arg("params"), py::arg("budget"),
          py::arg("compression"));
    m.def("predict_params", &ts::predict_params, py::arg("params"), py::arg("budget"),
          py::arg("compression"));
    m.def("predict_bpp", &ts::predict_bpp, py::arg("params"), py::arg("budget"),
          py::arg("compression"));

    py::class_<ts::LawTwoParams>(m, "LawTwoParams")
        .def(py::init([](double l0, double gamma, ts::ResidualVariant variant, double e, double f,
                         double t0, double delta) {
                 ts::LawTwoParams p;
                 p.l0 = l0;
                 p.gamma = gamma;
                 p.residual_variant = variant;
                 p.e = e;
                 p.f = f;
                 p.t0 = t0;
                 p.delta = delta;
                 return p;
             }),
             py::arg("l0"), py::arg("gamma"),
             py::arg("variant") = ts::ResidualVariant::ComputeT, py::arg("e") = 0.0,
             py::arg("f") = 0.0, py::arg("t0") = 1.0, py::arg("delta") = 0.0)
        .def_readonly("l0", &ts::LawTwoParams::l0)
        .def_readonly("gamma", &ts::LawTwoParams::gamma)
        .def_readonly("residual_variant", &ts::LawTwoParams::residual_variant)
        .def_readonly("e", &ts::LawTwoParams::e)
        .def_readonly("f", &ts::LawTwoParams::f)
        .def_readonly("t0", &ts::LawTwoParams::t0)
        .def_readonly("delta", &ts::LawTwoParams::delta)
        .def_readonly("offsets", &ts::LawTwoParams::offsets);

    py::class_<ts::ResidualModelRow>(m, "ResidualModelRow")
        .def_readonly("variant", &ts::ResidualModelRow::variant)
        .def_readonly("e", &ts::ResidualModelRow::e)
        .def_readonly("f", &ts::ResidualModelRow::f)
        .def_readonly("t0", &ts::ResidualModelRow::t0)
        .def_readonly("delta", &ts::ResidualModelRow::delta)
        .def_readonly("rmse_holdout", &ts::ResidualModelRow::rmse_holdout)
        .def_readonly("r2", &ts::ResidualModelRow::r2)
        .def_readonly("adj_r2", &ts::ResidualModelRow::adj_r2);

    py::class_<ts::ResidualModelReport>(m, "ResidualModelReport")
        .def_readonly("rows", &ts::ResidualModelReport::rows)
        .def_readonly("selected", &ts::ResidualModelReport::selected)
        .def_readonly("holdout_budget", &ts::ResidualModelReport::holdout_budget);

    auto loss_optima = [](const std::vector<std::tuple<double, double, double>>& optima) {
        std::vector<ts::LossOptimum> pts;
        for (const auto& [c, t, l] : optima) pts.push_back({c, t, l});
        return pts;
    };
    m.def(
        "fit_law2",
        [loss_optima](const std::vector<std::tuple<double, double, double>>& optima,
                      ts::ResidualVariant variant, ts::Family family, bool nested) {
            ts::LawTwoOptions options;
            options.family = family;
            options.nested = nested;
            return ts::fit_law2(loss_optima(optima), variant, options);
        },
        py::arg("optima"), py::arg("variant") = ts::ResidualVariant::ComputeT,
        py::arg("family") = ts::Family::LatentEntropy, py::arg("nested") = true);
    m.def(
        "select_residual_model",
        [loss_optima](const std::vector<std::tuple<double, double, double>>& optima,
                      double holdout_budget, bool nested) {
            ts::LawTwoOptions options;
            options.nested = nested;
            return ts::select_residual_model(loss_optima(optima), holdout_budget, options);
        },
        py::arg("optima"), py::arg("holdout_budget"), py::arg("nested") = true);
    m.def("optimal_compression", &ts::optimal_compression, py::arg("params"), py::arg("budget"));
    m.def("predict_loss", &ts::predict_loss, py::arg("params"), py::arg("budget"),
          py::arg("compression"));
    m.def("loss_sensitivity", &ts::loss_sensitivity, py::arg("params"), py::arg("budget"),
          py::arg("compression"));

    py::class_<ts::TruthSpec>(m, "TruthSpec")
        .def(py::init<>())
        .def_readwrite("b0", &ts::TruthSpec::b0)
        .def_readwrite("alpha", &ts::TruthSpec::alpha)
        .def_readwrite("beta", &ts::TruthSpec::beta)
        .def_readwrite("l0", &ts::TruthSpec::l0)
        .def_readwrite("gamma", &ts::TruthSpec::gamma)
        .def_readwrite("e", &ts::TruthSpec::e)
        .def_readwrite("f", &ts::TruthSpec::f)
        .def_readwrite("t0", &ts::TruthSpec::t0)
        .def_readwrite("delta", &ts::TruthSpec::delta)
        .def_readwrite("noise_sigma", &ts::TruthSpec::noise_sigma)
        .def_readwrite("curvature", &ts::TruthSpec::curvature)
        .def_readwrite("seed", &ts::TruthSpec::seed);

    m.def("generate_grid", &ts::generate_grid, py::arg("spec"), py::arg("budgets"),
          py::arg("compressions"), py::arg("models_per_cell") = 7);
    m.def("truth_loss", &ts::truth_loss, py::arg("spec"), py::arg("budget"), py::arg("compression"));
    m.def("truth_bytes", &ts::truth_bytes, py::arg("spec"), py::arg("budget"),
          py::arg("compression"));

    py::class_<ts::ParityTable>(m, "ParityTable")
        .def_readonly("base_language", &ts::ParityTable::base_language)
        .def_readonly("entries", &ts::ParityTable::entries)
        .def_readonly("n_sentences", &ts::ParityTable::n_sentences);

    m.def(
        "estimate_parity",
        [](const std::vector<std::tuple<std::string, std::string, std::size_t>>& parallel,
           const std::string& base) {
            std::vector<ts::AlignedSentence> sentences;
            for (const auto& [id, lang, bytes] : parallel) sentences.push_back({id, lang, bytes});
            return ts::estimate_parity(sentences, base);
        },
        py::arg("parallel"), py::arg("base"),
        "parallel: list of (sentence_id, language, byte_count) rows");
    m.def(
        "inflate_bytes",
        [](const py::bytes& data, std::size_t stride) {
            std::string raw = data;
            std::vector<std::uint8_t> v(raw.begin(), raw.end());
            auto out = ts::inflate_bytes(v, stride);
            return py::bytes(reinterpret_cast<const char*>(out.data()), out.size());
        },
        py::arg("data"), py::arg("stride") = 1);
    m.def(
        "strip_inflation",
        [](const py::bytes& data, std::size_t stride) {
            std::string raw = data;
            std::vector<std::uint8_t> v(raw.begin(), raw.end());
            auto out = ts::strip_inflation(v, stride);
            return py::bytes(reinterpret_cast<const char*>(out.data()), out.size());
        },
        py::arg("data"), py::arg("stride") = 1);
    m.def("mix_weights", &ts::mix_weights, py::arg("parity"));
}
