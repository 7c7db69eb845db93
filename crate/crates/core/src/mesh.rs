//! Triangulations of S³ by repeated subdivision of the 4-orthoplex boundary.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::hopf::CartesianPoint;

/// Deepest subdivision level built unless a caller raises the cap.
pub const DEFAULT_MAX_LEVEL: u32 = 6;

#[derive(Clone, Debug)]
pub struct SphereTriangulation {
    pub vertices: Vec<CartesianPoint>,
    pub tetrahedra: Vec<[u32; 4]>,
    pub level: u32,
    /// Unique edges, endpoints sorted.
    pub edges: Vec<[u32; 2]>,
    /// Edge ids of each tetrahedron in the order
    /// `(01, 02, 03, 12, 13, 23)` of its local vertices.
    pub tet_edges: Vec<[u32; 6]>,
}

/// Combinatorial summary used by the closed-manifold checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComplexCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub tetrahedra: usize,
    /// Every triangle has exactly two cofaces.
    pub closed: bool,
}

impl ComplexCounts {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64 - self.tetrahedra as i64
    }
}

pub const TET_EDGE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn triangulate_sphere3(level: u32) -> Result<SphereTriangulation> {
    triangulate_sphere3_capped(level, DEFAULT_MAX_LEVEL)
}

pub fn triangulate_sphere3_capped(level: u32, max_level: u32) -> Result<SphereTriangulation> {
    if level > max_level {
        return Err(Error::ResourceLimit(format!(
            "triangulation level {level} exceeds the configured cap {max_level}"
        )));
    }
    let mut vertices = Vec::with_capacity(8);
    for i in 0..4 {
        for sign in [1.0, -1.0] {
            let mut x = [0.0; 4];
            x[i] = sign;
            vertices.push(CartesianPoint::from_r4(x));
        }
    }
    let mut tets = Vec::with_capacity(16);
    for mask in 0..16u32 {
        let t: [u32; 4] = std::array::from_fn(|i| 2 * i as u32 + ((mask >> i) & 1));
        tets.push(t);
    }
    for _ in 0..level {
        tets = subdivide(&mut vertices, &tets);
    }
    let (edges, tet_edges) = edge_tables(&tets);
    Ok(SphereTriangulation {
        vertices,
        tetrahedra: tets,
        level,
        edges,
        tet_edges,
    })
}

fn subdivide(vertices: &mut Vec<CartesianPoint>, tets: &[[u32; 4]]) -> Vec<[u32; 4]> {
    let mut midpoints: HashMap<(u32, u32), u32> = HashMap::with_capacity(tets.len() * 2);
    let mut out = Vec::with_capacity(tets.len() * 8);
    for t in tets {
        let mut mid = |a: u32, b: u32| -> u32 {
            *midpoints.entry(key(a, b)).or_insert_with(|| {
                let pa = vertices[a as usize].to_r4();
                let pb = vertices[b as usize].to_r4();
                let m = std::array::from_fn(|i| 0.5 * (pa[i] + pb[i]));
                vertices.push(CartesianPoint::from_r4(m).normalized());
                (vertices.len() - 1) as u32
            })
        };
        let [a, b, c, d] = *t;
        let (ab, ac, ad) = (mid(a, b), mid(a, c), mid(a, d));
        let (bc, bd, cd) = (mid(b, c), mid(b, d), mid(c, d));
        out.push([a, ab, ac, ad]);
        out.push([b, ab, bc, bd]);
        out.push([c, ac, bc, cd]);
        out.push([d, ad, bd, cd]);

        // Inner octahedron: opposite vertex pairs are its three diagonals.
        let diagonals = [(ab, cd), (ac, bd), (ad, bc)];
        let dist = |(p, q): (u32, u32)| {
            let x = vertices[p as usize].to_r4();
            let y = vertices[q as usize].to_r4();
            (0..4).map(|i| (x[i] - y[i]).powi(2)).sum::<f64>()
        };
        let mut best = 0;
        for i in 1..3 {
            let (di, db) = (dist(diagonals[i]), dist(diagonals[best]));
            let tie_wins = di == db && key(diagonals[i].0, diagonals[i].1) < key(diagonals[best].0, diagonals[best].1);
            if di < db || tie_wins {
                best = i;
            }
        }
        let (p, q) = diagonals[best];
        let (x1, y1) = diagonals[(best + 1) % 3];
        let (x2, y2) = diagonals[(best + 2) % 3];
        let ring = [x1, x2, y1, y2];
        for i in 0..4 {
            out.push([p, q, ring[i], ring[(i + 1) % 4]]);
        }
    }
    out
}

fn edge_tables(tets: &[[u32; 4]]) -> (Vec<[u32; 2]>, Vec<[u32; 6]>) {
    let mut ids: HashMap<(u32, u32), u32> = HashMap::with_capacity(tets.len() * 2);
    let mut edges = Vec::new();
    let mut tet_edges = Vec::with_capacity(tets.len());
    for t in tets {
        let mut te = [0u32; 6];
        for (slot, &(i, j)) in TET_EDGE_PAIRS.iter().enumerate() {
            let k = key(t[i], t[j]);
            te[slot] = *ids.entry(k).or_insert_with(|| {
                edges.push([k.0, k.1]);
                (edges.len() - 1) as u32
            });
        }
        tet_edges.push(te);
    }
    (edges, tet_edges)
}

impl SphereTriangulation {
    /// Counts cells and checks that every triangle bounds exactly two tetrahedra.
    pub fn counts(&self) -> ComplexCounts {
        let mut faces: HashMap<[u32; 3], u8> = HashMap::with_capacity(self.tetrahedra.len() * 2);
        for t in &self.tetrahedra {
            for skip in 0..4 {
                let mut f = [0u32; 3];
                let mut k = 0;
                for (i, &v) in t.iter().enumerate() {
                    if i != skip {
                        f[k] = v;
                        k += 1;
                    }
                }
                f.sort_unstable();
                *faces.entry(f).or_insert(0) += 1;
            }
        }
        ComplexCounts {
            vertices: self.vertices.len(),
            edges: self.edges.len(),
            faces: faces.len(),
            tetrahedra: self.tetrahedra.len(),
            closed: faces.values().all(|&c| c == 2),
        }
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let a = self.vertices[e[0] as usize].to_r4();
                let b = self.vertices[e[1] as usize].to_r4();
                (0..4).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Writes vertices (ℝ⁴ coordinates) and tetrahedra as a `4OFF` file.
    pub fn write_off<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "4OFF")?;
        writeln!(w, "{} {} 0", self.vertices.len(), self.tetrahedra.len())?;
        for v in &self.vertices {
            let x = v.to_r4();
            writeln!(w, "{:.12} {:.12} {:.12} {:.12}", x[0], x[1], x[2], x[3])?;
        }
        for t in &self.tetrahedra {
            writeln!(w, "4 {} {} {} {}", t[0], t[1], t[2], t[3])?;
        }
        Ok(())
    }
}

/// Process-wide cache so ensembles share one mesh per level.
pub fn cached_triangulation(level: u32) -> Result<Arc<SphereTriangulation>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<SphereTriangulation>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("triangulation cache poisoned");
    if let Some(t) = guard.get(&level) {
        return Ok(Arc::clone(t));
    }
    let t = Arc::new(triangulate_sphere3(level)?);
    guard.insert(level, Arc::clone(&t));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthoplex_boundary() {
        let t = triangulate_sphere3(0).unwrap();
        let c = t.counts();
        assert_eq!((c.vertices, c.edges, c.faces, c.tetrahedra), (8, 24, 32, 16));
        assert!(c.closed);
        assert_eq!(c.euler_characteristic(), 0);
    }

    #[test]
    fn subdivision_keeps_a_closed_three_manifold() {
        for level in 1..=3 {
            let t = triangulate_sphere3(level).unwrap();
            let c = t.counts();
            assert!(c.closed, "level {level}");
            assert_eq!(c.euler_characteristic(), 0, "level {level}");
            assert_eq!(c.tetrahedra, 16 * 8usize.pow(level));
            assert!(t.vertices.iter().all(|v| v.is_unit(1e-12)));
        }
    }

    #[test]
    fn edges_shrink_roughly_by_half() {
        let l: Vec<f64> = (1..=3)
            .map(|k| triangulate_sphere3(k).unwrap().max_edge_length())
            .collect();
        for w in l.windows(2) {
            let r = w[0] / w[1];
            assert!(r > 1.7 && r < 2.3, "ratio {r}");
        }
    }

    #[test]
    fn deterministic_construction() {
        let a = triangulate_sphere3(2).unwrap();
        let b = triangulate_sphere3(2).unwrap();
        assert_eq!(a.tetrahedra, b.tetrahedra);
        assert_eq!(a.vertices, b.vertices);
    }

    #[test]
    fn level_cap_is_enforced() {
        assert!(matches!(triangulate_sphere3_capped(3, 2), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn off_header() {
        let t = triangulate_sphere3(0).unwrap();
        let mut buf = Vec::new();
        t.write_off(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("4OFF"));
        assert_eq!(lines.next(), Some("8 16 0"));
        assert_eq!(s.lines().count(), 2 + 8 + 16);
    }
}
