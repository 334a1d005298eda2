#include "adgame/cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <system_error>
#include <unistd.h>

#include "adgame/error.hpp"

namespace adgame::cli {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump(const nlohmann::ordered_json& v, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        dump(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump(v[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? format_number(x) : "null";
      return;
    }
    default: out += v.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& value) {
  std::string out;
  dump(value, 0, out);
  out += '\n';
  return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw DimensionMismatch("CSV row width differs from header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text_ += ',';
    text_ += format_number(values[i]);
  }
  text_ += '\n';
  ++rows_;
}

std::filesystem::path resolve_output(const std::filesystem::path& out) {
  const char* dir = std::getenv("ADGAME_OUTPUT_DIR");
  if (dir && *dir && out.is_relative()) return std::filesystem::path(dir) / out;
  return out;
}

void write_artifacts(const std::vector<Artifact>& artifacts) {
  std::vector<std::filesystem::path> temps;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) std::filesystem::remove(t, ec);
  };
  for (const auto& a : artifacts) {
    auto tmp = a.path;
    tmp += ".tmp." + std::to_string(::getpid());
    temps.push_back(tmp);
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << a.content;
    f.close();
    if (!f) {
      cleanup();
      throw InvalidInput("cannot write output file " + a.path.string());
    }
  }
  for (std::size_t i = 0; i < artifacts.size(); ++i) {
    std::error_code ec;
    std::filesystem::rename(temps[i], artifacts[i].path, ec);
    if (ec) {
      cleanup();
      throw InvalidInput("cannot move output into place at " + artifacts[i].path.string() + ": " +
                         ec.message());
    }
  }
}

}  // namespace adgame::cli
