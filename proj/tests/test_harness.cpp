#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "caltec/harness.hpp"
#include "caltec/npy.hpp"
#include "caltec/rng.hpp"
#include "caltec/synthetic.hpp"

using namespace caltec;
namespace fs = std::filesystem;

namespace {

fs::path corpus_dir(const std::string& name, std::size_t count)
{
  const auto dir = fs::temp_directory_path() / "caltec_test_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (std::size_t k = 0; k < count; ++k) {
    const auto s = gen_synthetic(16, 8, 6, 2, 0.05, 100 + k);
    save_tensor(s.tensor, dir / ("t" + std::to_string(k) + ".npy"), npy::DType::f32);
  }
  return dir;
}

ExperimentConfig small_config(const fs::path& dir)
{
  ExperimentConfig c;
  c.inputs = {dir};
  c.rows_per_packet = 4;
  return c;
}

std::string csv_without_timing(const std::vector<ResultRow>& rows)
{
  std::vector<ResultRow> copy = rows;
  for (auto& r : copy)
    r.repair_ms = 0.0;
  std::ostringstream out;
  write_csv(out, copy);
  return out.str();
}

} // namespace

TEST_SUITE("harness")
{
  TEST_CASE("fnv1a64 reference vectors")
  {
    CHECK(fnv1a64(std::string_view("")) == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64(std::string_view("a")) == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64(std::string_view("foobar")) == 0x85944171f73967e8ULL);
  }

  TEST_CASE("trace seed is frozen")
  {
    const auto a = trace_seed(1, "t0", 0.2, 3.0, 4);
    CHECK(a == trace_seed(1, "t0", 0.2, 3.0, 4));
    CHECK(a != trace_seed(1, "t0", 0.2, 3.0, 5));
    CHECK(a != trace_seed(1, "t1", 0.2, 3.0, 4));
    CHECK(a != trace_seed(2, "t0", 0.2, 3.0, 4));
    CHECK(a == derive_seed(1, {fnv1a64(std::string_view("t0")), double_bits(0.2), double_bits(3.0), 4}));
    CHECK(a == 0xeec340c87aec8b7cULL);
  }

  TEST_CASE("one row group: one row per method, one shared mask")
  {
    auto c = small_config(corpus_dir("single", 1));
    c.burst_loss_probs = {0.3};
    c.burst_lengths = {3};
    c.realizations = 1;
    c.methods = {Method::caltec, Method::zero_fill};
    const auto res = run_sweep(c);
    REQUIRE(res.rows.size() == 2);
    CHECK(res.errors.empty());
    CHECK(res.rows[0].method == "caltec");
    CHECK(res.rows[1].method == "zero_fill");
    CHECK(res.rows[0].mask_digest == res.rows[1].mask_digest);
    CHECK(res.rows[0].packets_lost == res.rows[1].packets_lost);
    CHECK(res.rows[0].mask_digest.size() == 16);
  }

  TEST_CASE("default grid row count and canonical order")
  {
    auto c = small_config(corpus_dir("grid", 1));
    const auto res = run_sweep(c);
    CHECK(res.rows.size() == 4 * 7 * 10 * 4);
    std::size_t k = 0;
    for (double pb : c.burst_loss_probs)
      for (double lb : c.burst_lengths)
        for (std::size_t m = 0; m < 10; ++m)
          for (Method method : all_methods()) {
            const auto& r = res.rows[k++];
            REQUIRE(r.pb == pb);
            REQUIRE(r.lb == lb);
            REQUIRE(r.realization == m);
            REQUIRE(r.method == method_name(method));
          }

    // Same mask across the methods of each group.
    for (std::size_t g = 0; g < res.rows.size(); g += 4)
      for (std::size_t j = 1; j < 4; ++j)
        REQUIRE(res.rows[g].mask_digest == res.rows[g + j].mask_digest);

    std::ostringstream csv;
    write_csv(csv, res.rows);
    std::istringstream in(csv.str());
    const auto summary = summarize(in);
    CHECK(summary.size() == 4 * 4);
    for (const auto& s : summary)
      CHECK(s.rows == 70);
  }

  TEST_CASE("sweeps replay exactly and do not depend on thread count")
  {
    auto c = small_config(corpus_dir("replay", 3));
    c.burst_loss_probs = {0.1, 0.3};
    c.burst_lengths = {2, 5};
    c.realizations = 3;
    const auto a = run_sweep(c);
    const auto b = run_sweep(c);
    c.threads = 4;
    const auto d = run_sweep(c);
    CHECK(csv_without_timing(a.rows) == csv_without_timing(b.rows));
    CHECK(csv_without_timing(a.rows) == csv_without_timing(d.rows));
    CHECK(a.rows.size() == 3 * 2 * 2 * 3 * 4);
    c.seed = 2;
    CHECK(csv_without_timing(run_sweep(c).rows) != csv_without_timing(a.rows));
  }

  TEST_CASE("config JSON overrides defaults")
  {
    ExperimentConfig c;
    apply_config_json(c, R"({"r": 4, "pb": [0.1], "lb": [2, 3], "methods": ["caltec"],
                             "order": "row_major", "padding": "exclude", "seed": 9,
                             "realizations": 2, "bits": 6, "threads": 2, "output": "x.csv"})");
    CHECK(c.rows_per_packet == 4);
    CHECK(c.burst_loss_probs == std::vector<double>{0.1});
    CHECK(c.burst_lengths == std::vector<double>{2, 3});
    CHECK(c.methods == std::vector<Method>{Method::caltec});
    CHECK(c.order == TransmissionOrder::row_major);
    CHECK(c.padding == PaddingMode::exclude);
    CHECK(c.seed == 9);
    CHECK(c.realizations == 2);
    CHECK(c.bits == 6);
    CHECK(c.threads == 2);
    CHECK(c.output == fs::path("x.csv"));

    ExperimentConfig back;
    apply_config_json(back, config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));

    CHECK_THROWS_AS(apply_config_json(c, R"({"rr": 4})"), std::invalid_argument);
    CHECK_THROWS_AS(apply_config_json(c, R"({"methods": ["median"]})"), std::invalid_argument);
    CHECK_THROWS_AS(apply_config_json(c, "{not json"), std::invalid_argument);
  }

  TEST_CASE("summaries")
  {
    const std::string header(csv_header);
    {
      std::istringstream in(header + "\nt,0.1,2,0,caltec,3,00000000000000aa,0.5,10,1.5,0,0,0\n");
      const auto s = summarize(in);
      REQUIRE(s.size() == 1);
      CHECK(s[0].pb == 0.1);
      CHECK(s[0].method == "caltec");
      CHECK(s[0].rows == 1);
      CHECK(s[0].mean_packets_lost == 3.0);
      CHECK(s[0].mean_mse == 0.5);
      CHECK(s[0].mean_psnr == 10.0);
      CHECK(s[0].mean_repair_ms == 1.5);
    }
    {
      std::istringstream in(header +
                            "\nt,0.2,2,0,zero_fill,3,00000000000000aa,1,10,1,0,0,0"
                            "\nt,0.2,3,0,zero_fill,5,00000000000000ab,3,20,1,0,0,0"
                            "\nt,0.2,3,1,zero_fill,0,00000000000000ac,0,inf,1,0,0,0\n");
      const auto s = summarize(in);
      REQUIRE(s.size() == 1);
      CHECK(s[0].rows == 3);
      CHECK(s[0].lossless_rows == 1);
      CHECK(s[0].mean_mse == doctest::Approx(4.0 / 3.0));
      CHECK(s[0].mean_psnr == 15.0);
    }
    {
      std::istringstream bad("tensor_id,pb\nt,0.1\n");
      CHECK_THROWS_AS(summarize(bad), std::invalid_argument);
      std::istringstream short_row(header + "\nt,0.1,2\n");
      CHECK_THROWS_AS(summarize(short_row), std::invalid_argument);
    }
  }

  TEST_CASE("bad parameters and unreadable tensors become error records")
  {
    const auto dir = corpus_dir("errors", 1);
    {
      std::ofstream(dir / "broken.npy") << "not an npy file";
    }
    auto c = small_config(dir);
    c.burst_loss_probs = {0.2, 0.9};
    c.burst_lengths = {1};
    c.realizations = 2;
    c.methods = {Method::zero_fill};
    const auto res = run_sweep(c);
    CHECK(res.rows.size() == 2); // t0 at P_B = 0.2
    REQUIRE(res.errors.size() == 3);
    CHECK(res.errors[0].tensor_id == "broken");
    CHECK(res.errors[1].tensor_id == "t0");
    CHECK(res.errors[1].pb == "0.9");
    CHECK(res.errors[2].realization == "1");

    c.output = dir / "out.csv";
    run_sweep_to_file(c);
    CHECK(fs::exists(dir / "out.csv.errors.csv"));
    std::ifstream in(dir / "out.csv");
    std::string first;
    std::getline(in, first);
    CHECK(first == csv_header);
  }
}
