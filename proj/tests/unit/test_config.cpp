#include <limits>
#include <sstream>

#include "doctest.h"
#include "sbdl/config.hpp"
#include "sbdl/error.hpp"

using namespace sbdl;

namespace {

KeyValueConfig from(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in, "test.cfg");
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigParseError);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

}  // namespace

TEST_CASE("key = value lines, comments and blanks") {
  const auto cfg = from("# header\n\nseed = 7\n engine=gibbs  # trailing\nbeta = inf\nname = a b\n");
  CHECK(cfg.get_u64("seed", 0) == 7);
  CHECK(cfg.get_string("engine", "") == "gibbs");
  CHECK(cfg.get_double("beta", 0.0) == std::numeric_limits<double>::infinity());
  CHECK(cfg.get_string("name", "") == "a b");
  CHECK(cfg.get_int("iters", 42) == 42);
  CHECK_FALSE(cfg.has("iters"));
}

TEST_CASE("overrides replace file values") {
  auto cfg = from("iters = 10\n");
  cfg.set("iters", "20");
  cfg.set("seed", "3");
  CHECK(cfg.get_int("iters", 0) == 20);
  CHECK(cfg.get_u64("seed", 0) == 3);
}

TEST_CASE("lists and booleans") {
  const auto cfg = from("engines = gibbs, vb-full ,vb-atomwise\nflag = true\noff = 0\n");
  CHECK(cfg.get_list("engines", {}) == std::vector<std::string>{"gibbs", "vb-full", "vb-atomwise"});
  CHECK(cfg.get_list("missing", {"x"}) == std::vector<std::string>{"x"});
  CHECK(cfg.get_bool("flag", false));
  CHECK_FALSE(cfg.get_bool("off", true));
}

TEST_CASE("malformed input is reported with its location") {
  CHECK(message_of([] { from("seed 7\n"); }).find("test.cfg:1") != std::string::npos);
  CHECK(message_of([] { from("a = 1\na = 2\n"); }).find("test.cfg:2") != std::string::npos);
  const auto cfg = from("iters = ten\nratio = 1.5x\nseed = -1\nflag = maybe\n");
  CHECK(message_of([&] { cfg.get_int("iters", 0); }).find("iters") != std::string::npos);
  message_of([&] { cfg.get_double("ratio", 0.0); });
  message_of([&] { cfg.get_u64("seed", 0); });
  message_of([&] { cfg.get_bool("flag", false); });
  message_of([&] { cfg.require_string("absent"); });
}

TEST_CASE("unknown keys are rejected") {
  const auto cfg = from("seed = 1\nitres = 5\n");
  CHECK(message_of([&] { cfg.reject_unknown({"seed", "iters"}); }).find("itres") != std::string::npos);
  CHECK_NOTHROW(cfg.reject_unknown({"seed", "itres"}));
}
