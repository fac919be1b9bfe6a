#pragma once
// `skylut` command line: precompute, render, validate, inspect-lut, presets.
// Exit codes: 0 success, 1 usage error, 2 data error.
#include <iosfwd>
#include <string>
#include <vector>

namespace skylut {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

// "400km", "2.5 km", "350m", "120" (metres). Throws std::invalid_argument.
double parse_length_m(const std::string& text);
// "256x256".
void parse_size(const std::string& text, int* width, int* height);

}  // namespace skylut
