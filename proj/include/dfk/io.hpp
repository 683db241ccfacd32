#pragma once

#include <string>

#include "dfk/field.hpp"
#include "dfk/grid.hpp"
#include "dfk/losses.hpp"

namespace dfk {

/// Sampled velocity container ("VFLD"). Little-endian layout:
///   magic 'V','F','L','D' | version u8 = 1 | dim u8 | channels u8 |
///   dtype u8 (0 f32, 1 f64) | dims u32 x dim | bbox lo/hi f64 x dim |
///   node values, x fastest, channels interleaved.
/// 2D files omit the z dim and z bounds.
GridField read_vfld(const std::string& path);
void write_vfld(const std::string& path, const GridField& grid, bool wide = true);

/// Scalar sequence container ("SFLD"): the VFLD layout with channels = frame
/// count plus a trailing f64 frame spacing after the bounding box.
ScalarSequence read_sfld(const std::string& path);
void write_sfld(const std::string& path, const ScalarSequence& seq, bool wide = true);

/// Kernel model container ("DFKM"). Little-endian layout:
///   magic 'D','F','K','M' | version u8 = 1 | type u8 | dim u8 | frames u32 |
///   count u64 | centers count x dim f64 | radii count f64 | frame_dt f64 |
///   weights frames x count x width f64.
KernelField read_dfkm(const std::string& path);
void write_dfkm(const std::string& path, const KernelField& field);

/// type-byte mapping of the DFKM header.
uint8_t dfkm_type_byte(KernelType type);
KernelType dfkm_type_from_byte(uint8_t byte);

/// Boundary samples from CSV lines "x,y,ux,uy" (2D) or "x,y,z,ux,uy,uz"
/// (3D); blank lines and lines starting with '#' are skipped.
BoundarySet read_boundary_csv(const std::string& path);

}  // namespace dfk
