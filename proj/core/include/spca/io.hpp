#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spca/expand.hpp"
#include "spca/pswf_basis.hpp"
#include "spca/quadrature.hpp"
#include "spca/spca_model.hpp"

namespace spca {

// Little-endian binary artifacts. Every writer goes through a temporary file
// and a rename, so readers never observe a partial file.
//
// PSWB basis:  "PSWB" u32 version, u32 L, f64 c, f64 T, f64 eps_nystrom, f64 theta_q,
//              u64 hash, u64 count, then per index i32 N, u32 n, f64 beta,
//              f64 alpha re/im, u32 samples, samples x (f64 node, f64 value).
// PSWQ rule:   "PSWQ" u32 version, u64 basis hash, f64 bandlimit, f64 theta_q, u32 N_r,
//              then per ring f64 r, f64 weight, u32 N_theta.
// SPCI stack:  "SPCI" u32 version, u32 M, u32 H, u32 W, f64 pixels row-major per image,
//              optional trailer "PROV" u32 length + provenance bytes.
// SPCC coeffs: "SPCC" u32 version, u64 basis hash, u32 M, u32 count, u32 method, u32 side,
//              f64 residual bound, index table (i32 N, u32 n), then count complex f64 per image.
// SPCM model:  "SPCM" u32 version, u64 basis hash, u64 coeffs hash, u32 L, f64 c, u32 blocks,
//              per block i32 N, u32 size, u64 offset, f64 eigenvalues[size],
//              complex f64 eigenvectors[size x size] column-major, f64 weights[size];
//              then u32 n0 and complex f64 mean[n0].

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

std::string encode_basis(const PswfBasis& basis);
PswfBasis decode_basis(const std::string& bytes);
void save_basis(const std::filesystem::path& path, const PswfBasis& basis);
PswfBasis load_basis(const std::filesystem::path& path);

std::string encode_rule(const QuadratureRule& rule);
QuadratureRule decode_rule(const std::string& bytes);
void save_rule(const std::filesystem::path& path, const QuadratureRule& rule);
QuadratureRule load_rule(const std::filesystem::path& path);

std::string encode_stack(const ImageStack& stack);
ImageStack decode_stack(const std::string& bytes);
void save_stack(const std::filesystem::path& path, const ImageStack& stack);
ImageStack load_stack(const std::filesystem::path& path);

std::string encode_coefficients(const CoefficientSet& coeffs);
CoefficientSet decode_coefficients(const std::string& bytes);
void save_coefficients(const std::filesystem::path& path, const CoefficientSet& coeffs);
CoefficientSet load_coefficients(const std::filesystem::path& path);

std::string encode_model(const SpcaModel& model);
SpcaModel decode_model(const std::string& bytes);
void save_model(const std::filesystem::path& path, const SpcaModel& model);
SpcaModel load_model(const std::filesystem::path& path);

// CSV with header m,k,re,im.
std::string encode_projections(const ProjectionSet& proj);
ProjectionSet decode_projections(const std::string& text);
void save_projections(const std::filesystem::path& path, const ProjectionSet& proj);

}  // namespace spca
