//! Square lattices in the plane: sampling sets for local oscillation sums
//! and partitions of unity.
//!
//! A lattice here is rZ² clipped to a disk, kept together with its integer
//! indices so residue-class splitting is exact. Points are ordered
//! row-major in the integer indices (imaginary part first, then real), so
//! every derived quantity is deterministic.

use num_complex::Complex64;

use crate::{Error, Result};

/// A finite piece of the square lattice (spacing r) inside a disk.
#[derive(Debug, Clone)]
pub struct Lattice {
    /// Lattice spacing r.
    pub spacing: f64,
    /// Integer coordinates (m, s) of each point: the point is r(m + is).
    pub indices: Vec<(i64, i64)>,
    /// The lattice points r(m + is), aligned with `indices`.
    pub points: Vec<Complex64>,
}

/// All points of rZ² with |point| ≤ radius, ordered by imaginary then real
/// index.
pub fn make_lattice(spacing: f64, radius: f64) -> Result<Lattice> {
    if !(spacing > 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lattice wants spacing > 0 and radius > 0, got {spacing}, {radius}"
        )));
    }
    let bound = (radius / spacing).floor() as i64;
    let mut indices = Vec::new();
    let mut points = Vec::new();
    for s in -bound..=bound {
        for m in -bound..=bound {
            let p = Complex64::new(m as f64 * spacing, s as f64 * spacing);
            if p.norm() <= radius * (1.0 + 1e-12) {
                indices.push((m, s));
                points.push(p);
            }
        }
    }
    Ok(Lattice {
        spacing,
        indices,
        points,
    })
}

impl Lattice {
    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Whether the lattice is empty (only for radius < spacing... it still
    /// contains the origin, so never for valid parameters).
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest pairwise distance between lattice points (the separation
    /// constant δ). For an uncorrupted square lattice this equals the
    /// spacing; the O(n²) scan verifies it rather than assuming it.
    pub fn separation_constant(&self) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                min = min.min((self.points[i] - self.points[j]).norm());
            }
        }
        min
    }

    /// Split into q² sublattices by residue classes of the integer indices
    /// mod q. Each sublattice has separation q·r; their union is the
    /// original lattice and they are pairwise disjoint. Classes are ordered
    /// (0,0), (0,1), …, (q−1,q−1).
    pub fn split(&self, q: u32) -> Result<Vec<Lattice>> {
        if q == 0 {
            return Err(Error::InvalidParameter(
                "residue modulus must be positive".into(),
            ));
        }
        let q = q as i64;
        let mut out: Vec<Lattice> = (0..q * q)
            .map(|_| Lattice {
                spacing: self.spacing * q as f64,
                indices: Vec::new(),
                points: Vec::new(),
            })
            .collect();
        for (&(m, s), &p) in self.indices.iter().zip(&self.points) {
            let class = (s.rem_euclid(q) * q + m.rem_euclid(q)) as usize;
            out[class].indices.push((m, s));
            out[class].points.push(p);
        }
        Ok(out)
    }

    /// Distance from z to the nearest lattice point (brute force).
    pub fn nearest_distance(&self, z: Complex64) -> f64 {
        self.points
            .iter()
            .map(|&p| (p - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest distance from any of the given points to the lattice — the
    /// covering radius relative to that point set. A full lattice piece of
    /// spacing r covers its disk with gap ≤ r/√2 away from the rim.
    pub fn covering_gap(&self, points: &[Complex64]) -> f64 {
        // Hash lattice points into spacing-sized cells so each query scans
        // a small neighborhood instead of the whole lattice.
        use std::collections::HashMap;
        let r = self.spacing;
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in self.points.iter().enumerate() {
            let key = ((p.re / r).floor() as i64, (p.im / r).floor() as i64);
            cells.entry(key).or_default().push(i);
        }
        let mut gap = 0.0f64;
        for &z in points {
            let cx = (z.re / r).floor() as i64;
            let cy = (z.im / r).floor() as i64;
            let mut best = f64::INFINITY;
            // Expand rings of cells until a hit is found, then one extra
            // ring to guarantee the true nearest point is seen.
            let mut ring = 1i64;
            loop {
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        if let Some(bucket) = cells.get(&(cx + dx, cy + dy)) {
                            for &i in bucket {
                                best = best.min((self.points[i] - z).norm());
                            }
                        }
                    }
                }
                if best <= (ring - 1).max(0) as f64 * r || ring > 64 {
                    break;
                }
                ring += 1;
            }
            if best.is_infinite() {
                best = self.nearest_distance(z);
            }
            gap = gap.max(best);
        }
        gap
    }
}
