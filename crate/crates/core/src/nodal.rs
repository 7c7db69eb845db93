//! Nodal surfaces {Re ψ = 0} ⊂ S³ by marching tetrahedra, and their topology.

use std::io::Write;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::RandomHarmonic;
use crate::mesh::{cached_triangulation, SphereTriangulation, TET_EDGE_PAIRS};

/// Coarsest mesh level accepted for nodal extraction.
pub const MIN_LEVEL: u32 = 3;

const NONE: u32 = u32::MAX;

/// Topology of one connected component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentTopology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    /// (2 − χ)/2; an integer for closed orientable surfaces.
    #[serde(with = "ratio_serde")]
    pub genus: Ratio<i64>,
    /// Every edge of the component bounds exactly two triangles.
    pub closed: bool,
}

mod ratio_serde {
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
        (*r.numer(), *r.denom()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<i64>, D::Error> {
        let (n, k) = <(i64, i64)>::deserialize(d)?;
        Ok(Ratio::new(n, k))
    }
}

/// Triangulated level set of Re ψ on S³.
#[derive(Clone, Debug)]
pub struct NodalSurface {
    pub level: u32,
    /// Points of S³ (radially projected edge interpolants), as ℝ⁴ coordinates.
    pub vertices: Vec<[f64; 4]>,
    pub triangles: Vec<[u32; 3]>,
    /// Component id of each triangle, numbered by first appearance.
    pub component_labels: Vec<u32>,
    pub components: Vec<ComponentTopology>,
}

impl NodalSurface {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.components.iter().map(|c| c.euler_characteristic).sum()
    }

    pub fn closed(&self) -> bool {
        self.components.iter().all(|c| c.closed)
    }

    /// Sum of component genera.
    pub fn total_genus(&self) -> Ratio<i64> {
        self.components.iter().map(|c| c.genus).sum()
    }

    /// Writes the surface as an OFF file after stereographic projection from (0, 0, 0, 1).
    pub fn write_off<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "OFF")?;
        writeln!(w, "{} {} 0", self.vertices.len(), self.triangles.len())?;
        for x in &self.vertices {
            let s = 1.0 - x[3];
            writeln!(w, "{:.9} {:.9} {:.9}", x[0] / s, x[1] / s, x[2] / s)?;
        }
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins, so labels do not depend on traversal order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Re ψ at every mesh vertex.
pub fn vertex_values(h: &RandomHarmonic, mesh: &SphereTriangulation) -> Vec<f64> {
    mesh.vertices.par_iter().map(|&x| h.polynomial().eval(x).re).collect()
}

/// Nodal surface of Re ψ on the level-`level` triangulation of S³.
pub fn extract_nodal_surface(h: &RandomHarmonic, level: u32) -> Result<NodalSurface> {
    if level < MIN_LEVEL {
        return Err(Error::Domain(format!("mesh level {level} is below {MIN_LEVEL}")));
    }
    let mesh = cached_triangulation(level)?;
    let values = vertex_values(h, &mesh);
    Ok(surface_from_values(&mesh, &values))
}

/// Marching tetrahedra on given vertex values. A value of exactly 0 counts as positive,
/// which is the sign of the perturbation u + ε for infinitesimal ε > 0.
pub fn surface_from_values(mesh: &SphereTriangulation, values: &[f64]) -> NodalSurface {
    let positive: Vec<bool> = values.iter().map(|&v| v >= 0.0).collect();
    let mut edge_vertex = vec![NONE; mesh.edges.len()];
    let mut vertices = Vec::new();
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        if positive[a as usize] != positive[b as usize] {
            let (va, vb) = (values[a as usize], values[b as usize]);
            let t = va / (va - vb);
            let (xa, xb) = (mesh.vertices[a as usize].to_r4(), mesh.vertices[b as usize].to_r4());
            let mut x: [f64; 4] = std::array::from_fn(|i| xa[i] + t * (xb[i] - xa[i]));
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            x.iter_mut().for_each(|c| *c /= r);
            edge_vertex[e] = vertices.len() as u32;
            vertices.push(x);
        }
    }

    let mut triangles = Vec::new();
    for (tet, edges) in mesh.tetrahedra.iter().zip(&mesh.tet_edges) {
        let signs: [bool; 4] = std::array::from_fn(|i| positive[tet[i] as usize]);
        let count = signs.iter().filter(|&&s| s).count();
        if count == 0 || count == 4 {
            continue;
        }
        let crossing = |i: usize, j: usize| {
            let slot = TET_EDGE_PAIRS
                .iter()
                .position(|&(a, b)| (a, b) == (i.min(j), i.max(j)))
                .expect("edge pair");
            edge_vertex[edges[slot] as usize]
        };
        if count == 2 {
            let pos: Vec<usize> = (0..4).filter(|&i| signs[i]).collect();
            let neg: Vec<usize> = (0..4).filter(|&i| !signs[i]).collect();
            let (a, b, c, d) = (pos[0], pos[1], neg[0], neg[1]);
            // The crossings ac, ad, bd, bc form a cycle; split along ac–bd.
            let (ac, ad, bd, bc) = (crossing(a, c), crossing(a, d), crossing(b, d), crossing(b, c));
            triangles.push([ac, ad, bd]);
            triangles.push([ac, bd, bc]);
        } else {
            let odd = (0..4).find(|&i| signs[i] == (count == 1)).expect("lone vertex");
            let others: Vec<usize> = (0..4).filter(|&i| i != odd).collect();
            triangles.push([
                crossing(odd, others[0]),
                crossing(odd, others[1]),
                crossing(odd, others[2]),
            ]);
        }
    }

    let mut uf = UnionFind::new(vertices.len());
    for t in &triangles {
        uf.union(t[0], t[1]);
        uf.union(t[1], t[2]);
    }
    let mut label_of_root = vec![NONE; vertices.len()];
    let mut vertex_label = vec![NONE; vertices.len()];
    let mut next = 0u32;
    for t in &triangles {
        for &v in t {
            let r = uf.find(v) as usize;
            if label_of_root[r] == NONE {
                label_of_root[r] = next;
                next += 1;
            }
            vertex_label[v as usize] = label_of_root[r];
        }
    }
    let component_labels: Vec<u32> = triangles.iter().map(|t| vertex_label[t[0] as usize]).collect();

    let k = next as usize;
    let mut v_count = vec![0usize; k];
    for &l in &vertex_label {
        if l != NONE {
            v_count[l as usize] += 1;
        }
    }
    let mut f_count = vec![0usize; k];
    let mut edge_keys: Vec<u64> = Vec::with_capacity(triangles.len() * 3);
    for (t, &l) in triangles.iter().zip(&component_labels) {
        f_count[l as usize] += 1;
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let (a, b) = (t[i].min(t[j]) as u64, t[i].max(t[j]) as u64);
            edge_keys.push(a << 32 | b);
        }
    }
    edge_keys.par_sort_unstable();
    let mut e_count = vec![0usize; k];
    let mut open = vec![false; k];
    let mut i = 0;
    while i < edge_keys.len() {
        let mut j = i;
        while j < edge_keys.len() && edge_keys[j] == edge_keys[i] {
            j += 1;
        }
        let l = vertex_label[(edge_keys[i] >> 32) as usize] as usize;
        e_count[l] += 1;
        if j - i != 2 {
            open[l] = true;
        }
        i = j;
    }
    let components = (0..k)
        .map(|c| {
            let chi = v_count[c] as i64 - e_count[c] as i64 + f_count[c] as i64;
            ComponentTopology {
                vertices: v_count[c],
                edges: e_count[c],
                faces: f_count[c],
                euler_characteristic: chi,
                genus: Ratio::new(2 - chi, 2),
                closed: !open[c],
            }
        })
        .collect();
    NodalSurface {
        level: mesh.level,
        vertices,
        triangles,
        component_labels,
        components,
    }
}

/// Topology at two consecutive levels, and whether it agrees.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RefinementCheck {
    pub level: u32,
    pub components: usize,
    pub euler_characteristic: i64,
    pub finer_components: usize,
    pub finer_euler_characteristic: i64,
    pub closed: bool,
    pub stable: bool,
}

/// Extracts the surface at `level` and `level + 1` and compares component count and χ.
pub fn refinement_check(h: &RandomHarmonic, level: u32) -> Result<(NodalSurface, RefinementCheck)> {
    let coarse = extract_nodal_surface(h, level)?;
    let fine = extract_nodal_surface(h, level + 1)?;
    let check = RefinementCheck {
        level,
        components: coarse.component_count(),
        euler_characteristic: coarse.euler_characteristic(),
        finer_components: fine.component_count(),
        finer_euler_characteristic: fine.euler_characteristic(),
        closed: coarse.closed() && fine.closed(),
        stable: coarse.component_count() == fine.component_count()
            && coarse.euler_characteristic() == fine.euler_characteristic(),
    };
    Ok((coarse, check))
}

/// |m|(k − 2)/2 + 1, the genus of an |m|-sheeted cover of S² branched over k fibers.
pub fn genus_from_zero_count(m: i32, k: u32) -> Ratio<i64> {
    Ratio::new(m.unsigned_abs() as i64 * (k as i64 - 2), 2) + 1
}

/// |m|(k − 2) + 1, the same count for a 2|m|-sheeted cover.
pub fn genus_two_sheet(m: i32, k: u32) -> i64 {
    m.unsigned_abs() as i64 * (k as i64 - 2) + 1
}

/// χ = s·(2 − k) for an s-sheeted cover of S² minus k points, glued to k circles.
pub fn euler_from_sheets(sheets: i64, k: u32) -> i64 {
    sheets * (2 - k as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis_nm;
    use crate::harmonic::sample_harmonic_stream;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn z1() -> RandomHarmonic {
        let b = Arc::new(build_basis_nm(1, 1).unwrap());
        let mut poly = vec![Complex64::new(0.0, 0.0); 2];
        poly[b.bidegree.index(1, 0)] = Complex64::new(1.0, 0.0);
        RandomHarmonic::from_polynomial(b, &poly).unwrap()
    }

    #[test]
    fn genus_formula_examples() {
        assert_eq!(genus_from_zero_count(2, 2), Ratio::from_integer(1));
        assert_eq!(genus_from_zero_count(1, 1), Ratio::new(1, 2));
        assert_eq!(genus_from_zero_count(3, 4), Ratio::from_integer(4));
        assert_eq!(genus_two_sheet(1, 1), 0);
        assert_eq!(euler_from_sheets(2, 1), 2);
    }

    #[test]
    fn great_sphere() {
        let s = extract_nodal_surface(&z1(), 4).unwrap();
        assert_eq!(s.component_count(), 1);
        let c = s.components[0];
        assert_eq!(c.euler_characteristic, 2);
        assert_eq!(c.genus, Ratio::from_integer(0));
        assert!(c.closed);
        // Vertices lie on {Re z1 = 0} up to the linear interpolation error.
        assert!(s.vertices.iter().all(|x| x[0].abs() < 0.05));
    }

    #[test]
    fn zero_values_count_as_positive() {
        // Re z1 vanishes exactly at mesh vertices on the coordinate hyperplane; the result is
        // still a closed surface.
        let mesh = cached_triangulation(3).unwrap();
        let values: Vec<f64> = mesh.vertices.iter().map(|x| x.z1.re).collect();
        assert!(values.contains(&0.0));
        let s = surface_from_values(&mesh, &values);
        assert!(s.closed());
        assert_eq!(s.euler_characteristic() % 2, 0);
    }

    #[test]
    fn random_surfaces_are_closed_with_even_characteristic() {
        let b = Arc::new(build_basis_nm(4, 2).unwrap());
        for s in 0..3 {
            let h = sample_harmonic_stream(b.clone(), 8, s).unwrap();
            let surf = extract_nodal_surface(&h, 4).unwrap();
            assert!(surf.closed());
            for c in &surf.components {
                assert_eq!(c.euler_characteristic % 2, 0);
                assert!(c.genus.is_integer());
                assert_eq!(c.edges * 2, c.faces * 3);
            }
            assert_eq!(surf.component_labels.len(), surf.triangles.len());
        }
    }

    #[test]
    fn level_below_minimum_is_rejected() {
        assert!(extract_nodal_surface(&z1(), 2).is_err());
    }

    #[test]
    fn off_export() {
        let s = extract_nodal_surface(&z1(), 3).unwrap();
        let mut buf = Vec::new();
        s.write_off(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("OFF"));
        assert_eq!(
            lines.next().unwrap(),
            format!("{} {} 0", s.vertices.len(), s.triangles.len())
        );
        assert_eq!(text.lines().count(), 2 + s.vertices.len() + s.triangles.len());
    }
}
