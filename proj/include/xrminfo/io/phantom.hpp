#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "xrminfo/core/image.hpp"

namespace xrminfo::io {

// Phantom geometry uses normalized coordinates: x and y in [-1, 1] across the
// grid, y pointing up.

struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double a = 0.5;     // semi-axis along the rotated x direction
    double b = 0.5;     // semi-axis along the rotated y direction
    double angle = 0.0; // radians, counterclockwise
    double value = 1.0; // added inside the ellipse
};

/// Sum of ellipse indicators, each pixel averaged over supersample^2 points.
Image2D render_ellipses(std::size_t size, std::span<const Ellipse> ellipses, std::size_t supersample = 4);

/// Centred disk of the given normalized radius and value.
Image2D disk_phantom(std::size_t size, double radius = 0.6, double value = 1.0);

/// Head-like slice: modified Shepp-Logan ellipses plus `texture_count` small
/// seeded ellipses of amplitude up to `texture_amplitude`. Region means of the
/// base ellipses are exact up to the texture.
struct EllipsesOptions {
    std::size_t texture_count = 40;
    double texture_amplitude = 0.08;
    double noise_sigma = 0.0; // additive Gaussian, seeded
};
Image2D ellipses_phantom(std::size_t size, std::uint64_t seed, const EllipsesOptions &opt = {});

/// Base ellipses of `ellipses_phantom` without texture.
std::vector<Ellipse> shepp_logan_ellipses();

struct Ellipsoid {
    double x = 0.0, y = 0.0, z = 0.0; // centre
    double a = 0.5, b = 0.5, c = 0.5; // semi-axes along x, y, z
    double mu = 1.0;                  // attenuation
};

/// Transmission images of seeded ellipsoids rotating about the vertical
/// axis: frame j is viewed at angle a_j = start + j * step and equals
/// flux(a_j) * exp(-attenuation * p_j), where p_j is the scaled line-integral
/// image and flux(a) = 1 + flux_drift * (a - start) models source intensity
/// drifting between exposures. Adjacent frames become less correlated as
/// `step` grows; step 0 repeats one frame.
struct SequenceOptions {
    std::size_t frames = 10;
    double start = 0.0;        // radians
    double step = 0.05;        // radians per frame
    std::size_t inclusions = 24;
    double attenuation = 1.2;
    double flux_drift = 0.2;   // relative flux change per radian
    double noise_sigma = 0.002; // additive Gaussian, seeded per frame
};
std::vector<Image2D> rotating_sequence(std::size_t size, std::uint64_t seed, const SequenceOptions &opt = {});

/// Ellipsoids used by `rotating_sequence` for a given seed.
std::vector<Ellipsoid> sequence_ellipsoids(std::uint64_t seed, std::size_t inclusions);

/// Scaled line integrals of the ellipsoids at one viewing angle.
Image2D project_ellipsoids(std::size_t size, std::span<const Ellipsoid> bodies, double angle);

enum class PhantomKind { Disk, Ellipses, RotatingSequence };

PhantomKind parse_phantom_kind(std::string_view name);
std::string_view phantom_kind_name(PhantomKind kind) noexcept;

/// Dispatch with default options; single-image kinds return one frame.
std::vector<Image2D> make_phantom(PhantomKind kind, std::size_t size, std::uint64_t seed);

/// Adds seeded N(0, sigma^2) noise; pixel i uses counter (seed, i, stream).
void add_gaussian_noise(Image2D &image, double sigma, std::uint64_t seed, std::uint32_t stream = 0);

} // namespace xrminfo::io
