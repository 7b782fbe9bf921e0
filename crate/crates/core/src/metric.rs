//! Numeric inner metric: a mesh of image level sets pushed to R^4, graph shortest paths,
//! and the arc-criterion ratio estimator.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::level_curve;
use crate::error::{Error, Result};
use crate::expr::{dist4, norm4, MapGerm, NumericMap};
use crate::numeric::{bisect, loglog_slope};

/// Images closer than this are identified.
pub const MERGE_TOL: f64 = 1e-10;

/// Level sets span this factor between the outermost and innermost radius.
const RING_SPAN: f64 = 1e4;

#[derive(Clone, Debug)]
pub struct Vertex {
    pub source: [f64; 2],
    pub image: [f64; 4],
}

#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vertex>,
    /// Edges between graph nodes with their R^4 length.
    pub edges: Vec<(usize, usize, f64)>,
    /// Vertex indices grouped by image radius, one band per decade.
    pub radius_bands: Vec<Vec<usize>>,
    /// Graph node of each vertex after merging coincident images.
    pub node_of: Vec<usize>,
    /// Number of vertices whose image coincides with that of another source point.
    pub collisions: usize,
    /// Image radii of the level sets, descending.
    pub rings: Vec<f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

struct Merger {
    cells: HashMap<[i64; 4], Vec<usize>>,
}

impl Merger {
    fn key(z: &[f64; 4]) -> [i64; 4] {
        z.map(|v| (v / MERGE_TOL).floor() as i64)
    }

    fn find(&self, z: &[f64; 4], images: &[[f64; 4]]) -> Option<usize> {
        let k = Self::key(z);
        for d in 0..81usize {
            let mut kk = k;
            let mut r = d;
            for c in kk.iter_mut() {
                *c += (r % 3) as i64 - 1;
                r /= 3;
            }
            if let Some(list) = self.cells.get(&kk) {
                for &n in list {
                    if dist4(&images[n], z) <= MERGE_TOL {
                        return Some(n);
                    }
                }
            }
        }
        None
    }
}

impl SurfaceMesh {
    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    fn dijkstra(&self, source: usize, target: usize) -> Option<f64> {
        let mut dist = vec![f64::INFINITY; self.num_nodes()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push((Reverse(OrdF(0.0)), source));
        while let Some((Reverse(OrdF(d)), n)) = heap.pop() {
            if n == target {
                return Some(d);
            }
            if d > dist[n] {
                continue;
            }
            for &(m, w) in &self.adjacency[n] {
                let nd = d + w;
                if nd < dist[m] {
                    dist[m] = nd;
                    heap.push((Reverse(OrdF(nd)), m));
                }
            }
        }
        None
    }

    /// Shortest-path length between two mesh vertices.
    pub fn inner_distance(&self, a: usize, b: usize) -> Result<f64> {
        let (na, nb) = (self.node_of[a], self.node_of[b]);
        if na == nb {
            return Ok(0.0);
        }
        self.dijkstra(na, nb).ok_or(Error::Disconnected)
    }

    /// Euclidean distance of the images of two vertices.
    pub fn outer_distance(&self, a: usize, b: usize) -> f64 {
        dist4(&self.vertices[a].image, &self.vertices[b].image)
    }

    /// Writes `v x y z1 z2 z3 z4` and `e i j` lines.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.vertices {
            let z = v.image;
            writeln!(w, "v {} {} {} {} {} {}", v.source[0], v.source[1], z[0], z[1], z[2], z[3])?;
        }
        let mut rep = vec![usize::MAX; self.num_nodes()];
        for (i, &n) in self.node_of.iter().enumerate() {
            if rep[n] == usize::MAX {
                rep[n] = i;
            }
        }
        for &(a, b, _) in &self.edges {
            writeln!(w, "e {} {}", rep[a], rep[b])?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
struct OrdF(f64);
impl Eq for OrdF {}
impl Ord for OrdF {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.partial_cmp(&o.0).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Meshes the germ on the level sets `|F| = r` for geometric radii below `outer_radius`.
pub fn sample_mesh(m: &MapGerm, outer_radius: f64, resolution: usize) -> Result<SurfaceMesh> {
    Ok(sample_mesh_with_points(m, outer_radius, resolution, &[])?.0)
}

/// Like [`sample_mesh`], with extra source points inserted as vertices on level sets
/// through them. Returns the vertex index of each extra point.
pub fn sample_mesh_with_points(
    m: &MapGerm,
    outer_radius: f64,
    resolution: usize,
    extra: &[[f64; 2]],
) -> Result<(SurfaceMesh, Vec<usize>)> {
    if resolution < 16 {
        return Err(Error::Input("mesh resolution must be at least 16".into()));
    }
    let map = m.numeric();
    let step = TAU / resolution as f64;
    let q = (-step).exp();
    let mut radii: Vec<f64> = Vec::new();
    let mut r = outer_radius;
    while r >= outer_radius / RING_SPAN {
        radii.push(r);
        r *= q;
    }
    let extra_r: Vec<f64> = extra.iter().map(|p| norm4(&map.eval(p[0], p[1]))).collect();
    radii.extend(extra_r.iter().copied().filter(|&r| r > 0.0));
    radii.sort_by(|a, b| b.partial_cmp(a).unwrap());
    radii.dedup_by(|a, b| (*a / *b - 1.0).abs() < 1e-12);

    let mut vertices = vec![Vertex {
        source: [0.0, 0.0],
        image: [0.0; 4],
    }];
    let mut ring_members: Vec<Vec<(f64, usize)>> = Vec::new();
    let mut extra_index = vec![0usize; extra.len()];
    for &r in &radii {
        let mut members: Vec<(f64, usize)> = Vec::new();
        for (th, src, img) in level_curve(&map, r, resolution, step) {
            members.push((th, vertices.len()));
            vertices.push(Vertex { source: src, image: img });
        }
        for (i, p) in extra.iter().enumerate() {
            if (extra_r[i] / r - 1.0).abs() < 1e-12 {
                extra_index[i] = vertices.len();
                members.push((p[1].atan2(p[0]).rem_euclid(TAU), vertices.len()));
                vertices.push(Vertex {
                    source: *p,
                    image: map.eval(p[0], p[1]),
                });
            }
        }
        if members.is_empty() {
            return Err(Error::Degenerate(format!("image does not reach radius {r}")));
        }
        members.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        ring_members.push(members);
    }

    let mut merger = Merger { cells: HashMap::new() };
    let mut node_images: Vec<[f64; 4]> = Vec::new();
    let mut node_of = Vec::with_capacity(vertices.len());
    let mut collisions = 0;
    for v in &vertices {
        match merger.find(&v.image, &node_images) {
            Some(n) => {
                node_of.push(n);
                collisions += 1;
            }
            None => {
                let n = node_images.len();
                node_images.push(v.image);
                merger.cells.entry(Merger::key(&v.image)).or_default().push(n);
                node_of.push(n);
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (k, ring) in ring_members.iter().enumerate() {
        for w in 0..ring.len() {
            pairs.push((ring[w].1, ring[(w + 1) % ring.len()].1));
        }
        match ring_members.get(k + 1) {
            Some(inner) => zipper(ring, inner, &mut pairs),
            None => pairs.extend(ring.iter().map(|&(_, v)| (v, 0))),
        }
    }
    let mut mesh = SurfaceMesh {
        vertices,
        edges: Vec::new(),
        radius_bands: Vec::new(),
        node_of,
        collisions,
        rings: radii,
        adjacency: vec![Vec::new(); node_images.len()],
    };
    let mut seen = HashSet::new();
    for (a, b) in pairs {
        let (na, nb) = (mesh.node_of[a], mesh.node_of[b]);
        if na == nb || !seen.insert((na.min(nb), na.max(nb))) {
            continue;
        }
        let w = dist4(&mesh.vertices[a].image, &mesh.vertices[b].image);
        mesh.edges.push((na, nb, w));
        mesh.adjacency[na].push((nb, w));
        mesh.adjacency[nb].push((na, w));
    }
    let mut bands: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, v) in mesh.vertices.iter().enumerate() {
        let r = norm4(&v.image);
        let key = if r > 0.0 { r.log10().floor() as i64 } else { i64::MIN };
        bands.entry(key).or_default().push(i);
    }
    mesh.radius_bands = bands.into_values().rev().collect();
    Ok((mesh, extra_index))
}

/// Triangulates the strip between two closed rings sorted by angle.
fn zipper(outer: &[(f64, usize)], inner: &[(f64, usize)], pairs: &mut Vec<(usize, usize)>) {
    let (n, m) = (outer.len(), inner.len());
    let (mut a, mut b) = (0, 0);
    pairs.push((outer[0].1, inner[0].1));
    while a < n || b < m {
        let na = if a < n { outer[(a + 1) % n].0 + if a + 1 >= n { TAU } else { 0.0 } } else { f64::INFINITY };
        let nb = if b < m { inner[(b + 1) % m].0 + if b + 1 >= m { TAU } else { 0.0 } } else { f64::INFINITY };
        if na <= nb {
            a += 1;
        } else {
            b += 1;
        }
        pairs.push((outer[a % n].1, inner[b % m].1));
    }
}

/// A source curve through the origin, parametrized by `u >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceArc {
    /// `u -> u (cos a, sin a)`.
    Ray { angle: f64 },
    /// `u -> (cx u^ex, cy u^ey)`.
    Power { cx: f64, ex: f64, cy: f64, ey: f64 },
}

impl SourceArc {
    pub fn at(&self, u: f64) -> [f64; 2] {
        match *self {
            SourceArc::Ray { angle } => [u * angle.cos(), u * angle.sin()],
            SourceArc::Power { cx, ex, cy, ey } => [cx * u.powf(ex), cy * u.powf(ey)],
        }
    }

    /// Source point on the arc whose image has norm `t`.
    pub fn point_at_radius(&self, map: &NumericMap, t: f64) -> Option<[f64; 2]> {
        let g = |u: f64| {
            let p = self.at(u);
            norm4(&map.eval(p[0], p[1])) - t
        };
        let mut hi = t * 1e-3;
        while g(hi) < 0.0 {
            hi *= 1.5;
            if hi > 1e3 {
                return None;
            }
        }
        let lo = hi / 1.5;
        Some(self.at(bisect(g, if lo < t * 1e-3 { 0.0 } else { lo }, hi, 200)))
    }
}

#[derive(Clone, Debug)]
pub enum ArcPairs {
    Random(usize),
    Explicit(Vec<(SourceArc, SourceArc)>),
}

/// `(radius, outer distance, inner distance)` samples for one arc pair.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleSeries {
    pub pair: (SourceArc, SourceArc),
    pub samples: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcEstimate {
    pub k_estimate: f64,
    pub growth_exponent: f64,
    pub radii: Vec<f64>,
    /// Largest inner/outer ratio at each radius.
    pub max_ratio: Vec<f64>,
    pub pairs: usize,
    pub collisions: usize,
    #[serde(skip)]
    pub series: Vec<ScaleSeries>,
}

fn random_pairs(n: usize, seed: u64) -> Vec<(SourceArc, SourceArc)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a = rng.gen_range(0.0..TAU);
            let b = a + std::f64::consts::PI + rng.gen_range(-0.5..0.5);
            (SourceArc::Ray { angle: a }, SourceArc::Ray { angle: b })
        })
        .collect()
}

/// Estimates `sup d_inner / d_outer` along arc pairs and its growth as the radius shrinks.
pub fn arc_criterion_estimate(
    m: &MapGerm,
    pairs: &ArcPairs,
    radii: &[f64],
    resolution: usize,
    seed: u64,
) -> Result<ArcEstimate> {
    if radii.len() < 4 {
        return Err(Error::Input("need at least 4 radii".into()));
    }
    let (rmax, rmin) = radii.iter().fold((0.0f64, f64::INFINITY), |(a, b), &r| (a.max(r), b.min(r)));
    if rmax / rmin < 99.0 {
        return Err(Error::Input("radii must span at least two decades".into()));
    }
    let list = match pairs {
        ArcPairs::Random(n) => random_pairs(*n, seed),
        ArcPairs::Explicit(v) => v.clone(),
    };
    let map = m.numeric();
    // (pair, radius index, source points)
    let mut queries = Vec::new();
    let mut points = Vec::new();
    for (k, &(a, b)) in list.iter().enumerate() {
        for (i, &t) in radii.iter().enumerate() {
            if let (Some(pa), Some(pb)) = (a.point_at_radius(&map, t), b.point_at_radius(&map, t)) {
                queries.push((k, i, points.len()));
                points.push(pa);
                points.push(pb);
            }
        }
    }
    let (mesh, index) = sample_mesh_with_points(m, rmax * 1.25, resolution, &points)?;
    let mut series: Vec<ScaleSeries> = list
        .iter()
        .map(|&pair| ScaleSeries {
            pair,
            samples: Vec::new(),
        })
        .collect();
    let mut max_ratio = vec![0.0f64; radii.len()];
    for (k, i, p) in queries {
        let (va, vb) = (index[p], index[p + 1]);
        let outer = mesh.outer_distance(va, vb);
        if outer <= 1e-300 {
            continue;
        }
        let inner = mesh.inner_distance(va, vb)?;
        max_ratio[i] = max_ratio[i].max(inner / outer);
        series[k].samples.push((radii[i], outer, inner));
    }
    let used: Vec<(f64, f64)> = radii
        .iter()
        .zip(&max_ratio)
        .filter(|(_, &r)| r > 0.0)
        .map(|(&t, &r)| (t, r))
        .collect();
    if used.len() < 2 {
        return Err(Error::Degenerate("no arc pair produced distinct image points".into()));
    }
    let (ts, rs): (Vec<f64>, Vec<f64>) = used.into_iter().unzip();
    Ok(ArcEstimate {
        k_estimate: rs.iter().copied().fold(0.0, f64::max),
        growth_exponent: -loglog_slope(&ts, &rs),
        radii: radii.to_vec(),
        max_ratio,
        pairs: list.len(),
        collisions: mesh.collisions,
        series,
    })
}

/// Log-log slope of the outer distance between two source arcs' images against the radius.
pub fn numeric_contact_slope(m: &MapGerm, a: SourceArc, b: SourceArc, radii: &[f64]) -> Option<f64> {
    let map = m.numeric();
    let mut ts = Vec::new();
    let mut ds = Vec::new();
    for &t in radii {
        let pa = a.point_at_radius(&map, t)?;
        let pb = b.point_at_radius(&map, t)?;
        ts.push(t);
        ds.push(dist4(&map.eval(pa[0], pa[1]), &map.eval(pb[0], pb[1])));
    }
    Some(loglog_slope(&ts, &ds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    #[test]
    fn smooth_mesh() {
        let m = parse_map("x, y, 0, 0").unwrap();
        let mesh = sample_mesh(&m, 0.1, 64).unwrap();
        let longest = mesh.edges.iter().map(|e| e.2).fold(0.0, f64::max);
        assert!(longest < 0.02, "{longest}");
        assert_eq!(mesh.collisions, 0);
        assert_eq!(mesh.inner_distance(5, 5).unwrap(), 0.0);
        let (a, b) = (mesh.edges[0].0, mesh.edges[0].1);
        assert!((mesh.inner_distance(a, b).unwrap() - mesh.edges[0].2).abs() < 1e-15);
    }

    #[test]
    fn crosscap_collisions() {
        let m = parse_map("x, y^2, x*y, 0").unwrap();
        let mesh = sample_mesh(&m, 0.1, 64).unwrap();
        assert!(mesh.collisions > 0);
    }

    #[test]
    fn cusp_inner_through_vertex() {
        let g6 = parse_map("x^2 - y^2, 2*x*y, x^3 - 3*x*y^2, 3*x^2*y - y^3").unwrap();
        let s: f64 = 0.01;
        let t = s.sqrt();
        let (mesh, idx) = sample_mesh_with_points(&g6, 0.1, 64, &[[t, 0.0], [-t, 0.0]]).unwrap();
        let inner = mesh.inner_distance(idx[0], idx[1]).unwrap();
        assert!((inner / (2.0 * s) - 1.0).abs() < 0.05, "{inner}");
    }
}

