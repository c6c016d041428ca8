//! Voxel occupancy grids: rasterization, an exact Euclidean distance
//! transform, and the `PCBODY01` flat binary interchange format.
//!
//! Grids are limited to m in {2, 3}; 2-D grids carry a third dimension of
//! extent 1 so the storage layout is uniform.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"PCBODY01";

#[derive(Debug, Error)]
pub enum GridError {
    #[error("unsupported grid dimension {0} (voxel grids support m = 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("voxel occupancy is empty")]
    EmptyOccupancy,
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Axis-aligned occupancy grid with cell centers at
/// `origin + (i + 0.5) * cell` per axis.
#[derive(Debug, Clone)]
pub struct VoxelBody {
    pub dim: usize,
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub cell: f64,
    pub occ: Vec<bool>,
    /// Signed distance at cell centers (positive inside), filled lazily.
    sdf: Vec<f64>,
}

impl VoxelBody {
    pub fn new(
        dim: usize,
        dims: [usize; 3],
        origin: [f64; 3],
        cell: f64,
        occ: Vec<bool>,
    ) -> Result<Self, GridError> {
        if dim != 2 && dim != 3 {
            return Err(GridError::UnsupportedDimension(dim));
        }
        assert_eq!(occ.len(), dims[0] * dims[1] * dims[2]);
        if !occ.iter().any(|&o| o) {
            return Err(GridError::EmptyOccupancy);
        }
        let mut body = VoxelBody {
            dim,
            dims,
            origin,
            cell,
            occ,
            sdf: Vec::new(),
        };
        body.sdf = body.compute_sdf();
        Ok(body)
    }

    /// Rasterize an analytic signed-distance function. Boundary cells
    /// (center distance >= 0) count as occupied: bodies are closures.
    pub fn rasterize<F>(
        dim: usize,
        lo: [f64; 3],
        hi: [f64; 3],
        resolution: usize,
        sdf: F,
    ) -> Result<Self, GridError>
    where
        F: Fn(&[f64]) -> f64,
    {
        if dim != 2 && dim != 3 {
            return Err(GridError::UnsupportedDimension(dim));
        }
        let longest = (0..dim).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        let cell = longest / resolution as f64;
        let mut dims = [1usize; 3];
        for a in 0..dim {
            dims[a] = (((hi[a] - lo[a]) / cell).round() as usize).max(1);
        }
        let mut occ = vec![false; dims[0] * dims[1] * dims[2]];
        let mut idx = 0;
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let p = [
                        lo[0] + (i as f64 + 0.5) * cell,
                        lo[1] + (j as f64 + 0.5) * cell,
                        lo[2] + (k as f64 + 0.5) * cell,
                    ];
                    occ[idx] = sdf(&p[..dim]) >= 0.0;
                    idx += 1;
                }
            }
        }
        Self::new(dim, dims, lo, cell, occ)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.cell,
            self.origin[1] + (j as f64 + 0.5) * self.cell,
            self.origin[2] + (k as f64 + 0.5) * self.cell,
        ]
    }

    pub fn bbox(&self) -> ([f64; 3], [f64; 3]) {
        let mut hi = self.origin;
        for a in 0..3 {
            hi[a] += self.dims[a] as f64 * self.cell;
        }
        (self.origin, hi)
    }

    /// Signed distance at an arbitrary point, from the precomputed
    /// transform at the nearest cell center (error within a cell diagonal).
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        let mut idx = [0usize; 3];
        let mut outside_shift = 0.0f64;
        for a in 0..self.dim {
            let t = (x[a] - self.origin[a]) / self.cell - 0.5;
            let i = t.round();
            let clamped = i.clamp(0.0, self.dims[a] as f64 - 1.0);
            outside_shift += ((i - clamped) * self.cell).powi(2);
            idx[a] = clamped as usize;
        }
        let s = self.sdf[self.index(idx[0], idx[1], idx[2])];
        if outside_shift > 0.0 {
            // Query point is beyond the grid: extend by the clamp offset.
            s.min(0.0) - outside_shift.sqrt()
        } else {
            s
        }
    }

    /// Exact Euclidean distance transform (squared-distance lower envelope,
    /// one pass per axis), run once against the occupancy and once against
    /// the complement mask.
    fn compute_sdf(&self) -> Vec<f64> {
        let n = self.occ.len();
        let d_to_empty = self.distance_field(|occupied| !occupied);
        let d_to_occ = self.distance_field(|occupied| occupied);
        let mut sdf = vec![0.0; n];
        for i in 0..n {
            // Center-to-center distances overestimate the distance to the
            // boundary surface by about half a cell on each side.
            if self.occ[i] {
                sdf[i] = (d_to_empty[i] - 0.5 * self.cell).max(0.0);
            } else {
                sdf[i] = -(d_to_occ[i] - 0.5 * self.cell).max(0.0);
            }
        }
        sdf
    }

    /// Distance from every cell center to the nearest cell whose occupancy
    /// matches `seed`.
    fn distance_field<F: Fn(bool) -> bool>(&self, seed: F) -> Vec<f64> {
        let [nx, ny, nz] = self.dims;
        let inf = f64::INFINITY;
        let mut d2: Vec<f64> = self
            .occ
            .iter()
            .map(|&o| if seed(o) { 0.0 } else { inf })
            .collect();

        let mut scratch_f = vec![0.0f64; nx.max(ny).max(nz)];
        // x pass
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    scratch_f[i] = d2[self.index(i, j, k)];
                }
                let out = dt_1d(&scratch_f[..nx]);
                for i in 0..nx {
                    d2[self.index(i, j, k)] = out[i];
                }
            }
        }
        // y pass
        for k in 0..nz {
            for i in 0..nx {
                for j in 0..ny {
                    scratch_f[j] = d2[self.index(i, j, k)];
                }
                let out = dt_1d(&scratch_f[..ny]);
                for j in 0..ny {
                    d2[self.index(i, j, k)] = out[j];
                }
            }
        }
        // z pass
        if nz > 1 {
            for j in 0..ny {
                for i in 0..nx {
                    for k in 0..nz {
                        scratch_f[k] = d2[self.index(i, j, k)];
                    }
                    let out = dt_1d(&scratch_f[..nz]);
                    for k in 0..nz {
                        d2[self.index(i, j, k)] = out[k];
                    }
                }
            }
        }
        d2.iter().map(|&v| v.sqrt() * self.cell).collect()
    }

    /// Write the grid in the `PCBODY01` format: a 32-byte little-endian
    /// header (magic, m as u16, dims as 3 x u16, origin as 3 x f32, cell
    /// as f32) followed by the occupancy bitmask packed LSB-first with x
    /// fastest.
    pub fn write_to(&self, path: &Path) -> Result<(), GridError> {
        let mut buf = Vec::with_capacity(32 + self.occ.len() / 8 + 1);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.dim as u16).to_le_bytes());
        for a in 0..3 {
            buf.extend_from_slice(&(self.dims[a] as u16).to_le_bytes());
        }
        for a in 0..3 {
            buf.extend_from_slice(&(self.origin[a] as f32).to_le_bytes());
        }
        buf.extend_from_slice(&(self.cell as f32).to_le_bytes());
        debug_assert_eq!(buf.len(), 32);
        let mut byte = 0u8;
        for (i, &o) in self.occ.iter().enumerate() {
            if o {
                byte |= 1 << (i % 8);
            }
            if i % 8 == 7 {
                buf.push(byte);
                byte = 0;
            }
        }
        if self.occ.len() % 8 != 0 {
            buf.push(byte);
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self, GridError> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 32 || &buf[..8] != MAGIC {
            return Err(GridError::BadHeader("missing PCBODY01 magic".into()));
        }
        let dim = u16::from_le_bytes([buf[8], buf[9]]) as usize;
        let mut dims = [0usize; 3];
        for a in 0..3 {
            dims[a] = u16::from_le_bytes([buf[10 + 2 * a], buf[11 + 2 * a]]) as usize;
        }
        let mut origin = [0.0f64; 3];
        for a in 0..3 {
            let off = 16 + 4 * a;
            origin[a] = f32::from_le_bytes(buf[off..off + 4].try_into().unwrap()) as f64;
        }
        let cell = f32::from_le_bytes(buf[28..32].try_into().unwrap()) as f64;
        let n = dims[0] * dims[1] * dims[2];
        let need = 32 + (n + 7) / 8;
        if buf.len() < need {
            return Err(GridError::BadHeader(format!(
                "occupancy truncated: need {need} bytes, got {}",
                buf.len()
            )));
        }
        let occ = (0..n).map(|i| buf[32 + i / 8] >> (i % 8) & 1 == 1).collect();
        Self::new(dim, dims, origin, cell, occ)
    }
}

/// Felzenszwalb-Huttenlocher 1-D squared distance transform.
fn dt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        if f[q].is_infinite() && f[v[k]].is_infinite() {
            continue;
        }
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                break;
            }
        }
        if s <= z[k] {
            // degenerate leading parabola at +inf
            v[k] = q;
        } else {
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
        }
    }
    let mut k = 0usize;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        out[q] = dq * dq + f[p];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc_sdf(x: &[f64]) -> f64 {
        1.0 - (x[0] * x[0] + x[1] * x[1]).sqrt()
    }

    #[test]
    fn rasterized_disc_distances_match_analytic() {
        let g = VoxelBody::rasterize(2, [-1.2, -1.2, 0.0], [1.2, 1.2, 0.0], 256, disc_sdf)
            .unwrap();
        let diag = g.cell * 2f64.sqrt();
        for &p in &[[0.0, 0.0], [0.5, 0.0], [0.3, -0.6], [1.1, 0.0], [0.0, -1.15]] {
            let got = g.signed_distance(&p);
            let want = disc_sdf(&p);
            assert!(
                (got - want).abs() <= diag,
                "sdf mismatch at {p:?}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn roundtrip_file_format() {
        let g = VoxelBody::rasterize(2, [-1.0, -1.0, 0.0], [1.0, 1.0, 0.0], 64, disc_sdf)
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("disc.pcbody");
        g.write_to(&path).unwrap();
        let h = VoxelBody::read_from(&path).unwrap();
        assert_eq!(g.dims, h.dims);
        assert_eq!(g.occ, h.occ);
        assert!((g.cell - h.cell).abs() < 1e-6);
    }

    #[test]
    fn empty_occupancy_rejected() {
        let err = VoxelBody::new(2, [4, 4, 1], [0.0; 3], 1.0, vec![false; 16]);
        assert!(matches!(err, Err(GridError::EmptyOccupancy)));
    }

    #[test]
    fn dt_handles_single_seed() {
        let mut f = vec![f64::INFINITY; 9];
        f[4] = 0.0;
        let out = dt_1d(&f);
        assert_eq!(out[0], 16.0);
        assert_eq!(out[8], 16.0);
        assert_eq!(out[4], 0.0);
    }
}
