// xfrag — workload-driven fragmentation toolkit for XML star-schema
// warehouses. Subcommands: generate, fragment, bench, report.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xfrag/xfrag.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 2 parameter, 3 workload/XML syntax, 4 bind, 5 consistency, 6 I/O.
constexpr int kExitParam = 2;
constexpr int kExitParse = 3;
constexpr int kExitBind = 4;
constexpr int kExitConsistency = 5;
constexpr int kExitIo = 6;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw xfrag::IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// "1000..7000", "1000..7000:500", "4000,5000" or any comma mix of those.
std::vector<std::size_t> parse_size_list(const std::string& text, std::size_t default_step) {
    std::vector<std::size_t> out;
    std::istringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) throw xfrag::ParamError("empty entry in size list '" + text + "'");
        std::size_t step = default_step;
        std::string range = token;
        if (auto colon = token.find(':'); colon != std::string::npos) {
            step = std::stoull(token.substr(colon + 1));
            range = token.substr(0, colon);
            if (step == 0) throw xfrag::ParamError("step must be >= 1 in '" + token + "'");
        }
        auto dots = range.find("..");
        try {
            if (dots == std::string::npos) {
                out.push_back(std::stoull(range));
            } else {
                std::size_t lo = std::stoull(range.substr(0, dots));
                std::size_t hi = std::stoull(range.substr(dots + 2));
                if (lo > hi) throw xfrag::ParamError("descending range '" + token + "'");
                for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
            }
        } catch (const std::invalid_argument&) {
            throw xfrag::ParamError("malformed size list entry '" + token + "'");
        } catch (const std::out_of_range&) {
            throw xfrag::ParamError("size out of range in '" + token + "'");
        }
    }
    if (out.empty()) throw xfrag::ParamError("size list '" + text + "' is empty");
    return out;
}

struct GenerateArgs {
    std::size_t facts = 7000;
    std::uint64_t seed = 42;
    std::size_t customers = 1000, suppliers = 1000, dates = 500, parts = 1000;
    std::string out;
};

int cmd_generate(const GenerateArgs& args) {
    xfrag::GeneratorSpec spec;
    spec.seed = args.seed;
    spec.fact_count = args.facts;
    spec.dimension_instances = {{"Customer", args.customers},
                                {"Supplier", args.suppliers},
                                {"Date", args.dates},
                                {"Part", args.parts}};
    xfrag::Warehouse wh = xfrag::generate_warehouse(spec);
    auto files = xfrag::save_warehouse(wh, args.out);
    std::cout << "generated " << wh.fact_sets.front().facts.size() << " facts, "
              << wh.dimensions.size() << " dimensions (seed " << args.seed << ")\n";
    for (const auto& f : files) std::cout << "  " << f.string() << "\n";
    return 0;
}

struct FragmentArgs {
    std::string warehouse;
    std::string workload;
    std::string strategy = "km";
    std::size_t k = 8;
    std::uint64_t seed = 42;
    std::string out;
    bool verify = false;
};

int cmd_fragment(const FragmentArgs& args) {
    fs::path model = args.warehouse;
    if (fs::is_directory(model)) model /= "dw-model.xml";
    xfrag::Warehouse wh = xfrag::load_warehouse(model);
    xfrag::Workload wl = xfrag::parse_workload(read_file(args.workload), args.workload);
    xfrag::bind_workload(wl, wh.meta);

    xfrag::FragSchema schema;
    xfrag::Strategy strategy = xfrag::strategy_from_string(args.strategy);
    switch (strategy) {
        case xfrag::Strategy::KM: {
            if (args.k < 1) throw xfrag::ParamError("k must be >= 1");
            xfrag::QpMatrix qp = xfrag::build_qp_matrix(wl);
            schema = xfrag::km_schema(qp, wl, args.k, args.seed);
            break;
        }
        case xfrag::Strategy::PC: schema = xfrag::pc_schema(wl); break;
        case xfrag::Strategy::AB: schema = xfrag::ab_schema(wl); break;
    }

    std::vector<xfrag::Fragment> fragments = xfrag::materialize(schema, wh, wl);
    if (args.verify) {
        xfrag::verify_partition(fragments, wh);
        xfrag::verify_derived_join(fragments);
        xfrag::verify_query_equivalence(fragments, schema, wh, wl);
        std::cout << "verify: completeness, disjointness, derived joins and query"
                     " equivalence all hold\n";
    }

    fs::path out_dir = args.out;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    xfrag::xml_save_file(xfrag::schema_to_xml(schema), out_dir / "frag-schema.xml");
    xfrag::Manifest manifest = xfrag::write_fragments(fragments, wh, out_dir);
    {
        std::ofstream script(out_dir / "fragments.xq", std::ios::binary);
        if (!script) throw xfrag::IoError("cannot write " + (out_dir / "fragments.xq").string());
        script << xfrag::emit_fragment_script(schema, wh.meta, wl);
    }
    {
        std::ofstream counts(out_dir / "fragcounts.csv", std::ios::binary);
        if (!counts) throw xfrag::IoError("cannot write " + (out_dir / "fragcounts.csv").string());
        counts << "strategy,fragment_count\n"
               << args.strategy << "," << schema.fragment_count() << "\n";
    }

    std::cout << args.strategy << ": " << schema.fragment_count() << " fragments ("
              << schema.fragment_count() - 1 << " + ELSE)\n";
    for (const auto& frag : fragments)
        std::cout << "  " << frag.id << ": " << frag.fact_part.facts.size() << " facts\n";
    std::cout << "wrote frag-schema.xml, " << manifest.entries.size()
              << " fragment document sets, manifest.xml, fragments.xq\n";
    return 0;
}

struct BenchArgs {
    std::string workload;
    std::string sizes = "1000..7000";
    std::string strategies = "nf,pc,ab,km";
    std::size_t k = 8;
    std::string ksweep = "1..10";
    std::string ksweep_sizes = "4000,5000";
    std::uint64_t seed = 42;
    std::string out;
    bool verify = false;
};

int cmd_bench(const BenchArgs& args) {
    xfrag::BenchConfig config;
    config.sizes = parse_size_list(args.sizes, 1000);
    config.ksweep_sizes = parse_size_list(args.ksweep_sizes, 1000);
    std::vector<std::size_t> krange = parse_size_list(args.ksweep, 1);
    config.ksweep_lo = *std::min_element(krange.begin(), krange.end());
    config.ksweep_hi = *std::max_element(krange.begin(), krange.end());
    config.k = args.k;
    config.seed = args.seed;
    config.verify = args.verify;
    config.strategies.clear();
    std::istringstream ss(args.strategies);
    for (std::string s; std::getline(ss, s, ',');)
        if (!s.empty()) config.strategies.push_back(s);
    if (config.strategies.empty()) throw xfrag::ParamError("no strategies given");

    xfrag::BenchResult result = xfrag::bench(config, read_file(args.workload));
    result.write(args.out);
    std::cout << "wrote efficiency.csv, ksweep.csv, overhead.csv, fragcounts.csv under "
              << args.out << "\n";
    for (const auto& row : result.fragcounts)
        std::cout << "  " << row.strategy << ": " << row.fragment_count << " fragments\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& files) {
    for (const auto& f : files) {
        std::cout << f << "\n";
        std::cout << xfrag::format_table(xfrag::read_csv(f));
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workload-driven fragmentation toolkit for XML star-schema warehouses"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "generate a synthetic warehouse");
    generate->add_option("--facts", gen.facts, "number of facts")->capture_default_str();
    generate->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
    generate->add_option("--customers", gen.customers, "Customer instances")
        ->capture_default_str();
    generate->add_option("--suppliers", gen.suppliers, "Supplier instances")
        ->capture_default_str();
    generate->add_option("--dates", gen.dates, "Date instances")->capture_default_str();
    generate->add_option("--parts", gen.parts, "Part instances")->capture_default_str();
    generate->add_option("-o,--out", gen.out, "output directory")->required();

    FragmentArgs frag;
    CLI::App* fragment = app.add_subcommand("fragment", "derive and materialize fragments");
    fragment->add_option("--warehouse", frag.warehouse, "warehouse directory or dw-model.xml")
        ->required();
    fragment->add_option("--workload", frag.workload, "workload script")->required();
    fragment->add_option("--strategy", frag.strategy, "km, pc or ab")->capture_default_str();
    fragment->add_option("-k,--k", frag.k, "cluster count (km)")->capture_default_str();
    fragment->add_option("--seed", frag.seed, "clustering seed")->capture_default_str();
    fragment->add_option("-o,--out", frag.out, "output directory")->required();
    fragment->add_flag("--verify", frag.verify, "run the correctness oracles and fail loudly");

    BenchArgs bench_args;
    CLI::App* bench_cmd = app.add_subcommand("bench", "run the benchmark protocol");
    bench_cmd->add_option("--workload", bench_args.workload, "workload script")->required();
    bench_cmd->add_option("--sizes", bench_args.sizes, "fact counts, e.g. 1000..7000 or 1000,4000")
        ->capture_default_str();
    bench_cmd->add_option("--strategies", bench_args.strategies, "subset of nf,pc,ab,km")
        ->capture_default_str();
    bench_cmd->add_option("-k,--k", bench_args.k, "cluster count for km")->capture_default_str();
    bench_cmd->add_option("--ksweep", bench_args.ksweep, "k range, e.g. 1..10")
        ->capture_default_str();
    bench_cmd->add_option("--ksweep-sizes", bench_args.ksweep_sizes, "fact counts for the k sweep")
        ->capture_default_str();
    bench_cmd->add_option("--seed", bench_args.seed, "generator/clustering seed")
        ->capture_default_str();
    bench_cmd->add_option("-o,--out", bench_args.out, "output directory")->required();
    bench_cmd->add_flag("--verify", bench_args.verify,
                        "run the correctness oracles on every configuration");

    std::vector<std::string> report_files;
    CLI::App* report = app.add_subcommand("report", "pretty-print CSV reports");
    report->add_option("files", report_files, "CSV files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitParam;
    }

    try {
        if (*generate) return cmd_generate(gen);
        if (*fragment) return cmd_fragment(frag);
        if (*bench_cmd) return cmd_bench(bench_args);
        if (*report) return cmd_report(report_files);
    } catch (const xfrag::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const xfrag::BindError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBind;
    } catch (const xfrag::ParamError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParam;
    } catch (const xfrag::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const xfrag::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConsistency;
    }
    return 0;
}
