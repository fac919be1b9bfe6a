#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace skylut {

// The three sampled wavelengths, in storage order.
enum class Band : std::size_t { kRed680 = 0, kGreen550 = 1, kBlue440 = 2 };

inline constexpr std::array<Band, 3> kBands = {Band::kRed680, Band::kGreen550,
                                               Band::kBlue440};
inline constexpr std::array<double, 3> kWavelengthsNm = {680.0, 550.0, 440.0};

constexpr double wavelength_m(Band band) {
  return kWavelengthsNm[static_cast<std::size_t>(band)] * 1e-9;
}

// Three scalars sampled at (680, 550, 440) nm. All arithmetic is
// componentwise.
struct SpectralTriple {
  double r680 = 0.0;
  double g550 = 0.0;
  double b440 = 0.0;

  constexpr SpectralTriple() = default;
  constexpr SpectralTriple(double r, double g, double b)
      : r680(r), g550(g), b440(b) {}
  static constexpr SpectralTriple uniform(double v) { return {v, v, v}; }

  constexpr double& operator[](Band band) {
    return band == Band::kRed680 ? r680 : band == Band::kGreen550 ? g550 : b440;
  }
  constexpr double operator[](Band band) const {
    return band == Band::kRed680 ? r680 : band == Band::kGreen550 ? g550 : b440;
  }
  constexpr double& operator[](std::size_t i) { return (*this)[static_cast<Band>(i)]; }
  constexpr double operator[](std::size_t i) const { return (*this)[static_cast<Band>(i)]; }

  constexpr SpectralTriple& operator+=(const SpectralTriple& o) {
    r680 += o.r680; g550 += o.g550; b440 += o.b440;
    return *this;
  }
  constexpr SpectralTriple& operator-=(const SpectralTriple& o) {
    r680 -= o.r680; g550 -= o.g550; b440 -= o.b440;
    return *this;
  }
  constexpr SpectralTriple& operator*=(const SpectralTriple& o) {
    r680 *= o.r680; g550 *= o.g550; b440 *= o.b440;
    return *this;
  }
  constexpr SpectralTriple& operator*=(double s) {
    r680 *= s; g550 *= s; b440 *= s;
    return *this;
  }

  constexpr bool operator==(const SpectralTriple&) const = default;

  constexpr double max_component() const {
    return r680 > g550 ? (r680 > b440 ? r680 : b440) : (g550 > b440 ? g550 : b440);
  }
  constexpr double min_component() const {
    return r680 < g550 ? (r680 < b440 ? r680 : b440) : (g550 < b440 ? g550 : b440);
  }
  bool is_finite() const {
    return std::isfinite(r680) && std::isfinite(g550) && std::isfinite(b440);
  }
};

constexpr SpectralTriple operator+(SpectralTriple a, const SpectralTriple& b) { return a += b; }
constexpr SpectralTriple operator-(SpectralTriple a, const SpectralTriple& b) { return a -= b; }
constexpr SpectralTriple operator*(SpectralTriple a, const SpectralTriple& b) { return a *= b; }
constexpr SpectralTriple operator*(SpectralTriple a, double s) { return a *= s; }
constexpr SpectralTriple operator*(double s, SpectralTriple a) { return a *= s; }
constexpr SpectralTriple operator/(const SpectralTriple& a, const SpectralTriple& b) {
  return {a.r680 / b.r680, a.g550 / b.g550, a.b440 / b.b440};
}
constexpr SpectralTriple operator/(const SpectralTriple& a, double s) {
  return {a.r680 / s, a.g550 / s, a.b440 / s};
}

inline SpectralTriple exp(const SpectralTriple& t) {
  return {std::exp(t.r680), std::exp(t.g550), std::exp(t.b440)};
}
inline SpectralTriple max(const SpectralTriple& a, const SpectralTriple& b) {
  return {std::fmax(a.r680, b.r680), std::fmax(a.g550, b.g550), std::fmax(a.b440, b.b440)};
}
inline SpectralTriple min(const SpectralTriple& a, const SpectralTriple& b) {
  return {std::fmin(a.r680, b.r680), std::fmin(a.g550, b.g550), std::fmin(a.b440, b.b440)};
}

}  // namespace skylut
