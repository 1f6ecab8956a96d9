#include "wptrx/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace wptrx {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{})
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

CsvCell::CsvCell(double v) : text(format_double(v)) {}
CsvCell::CsvCell(long v) : text(std::to_string(v)) {}
CsvCell::CsvCell(int v) : text(std::to_string(v)) {}
CsvCell::CsvCell(std::string s) : text(std::move(s)) {}
CsvCell::CsvCell(const char* s) : text(s) {}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<CsvCell>>& rows) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::runtime_error("write_csv: row width mismatch in " + path);
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i].text;
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out = open_out(path);
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace wptrx
