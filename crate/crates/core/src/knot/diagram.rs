//! Planar knot diagrams: Gauss codes, Reidemeister reductions and the bracket polynomial.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// Crossing cap for the state sum.
pub const MAX_CROSSINGS: usize = 16;

/// Laurent polynomial in `A` with integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Laurent(BTreeMap<i32, i64>);

impl Laurent {
    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn monomial(c: i64, e: i32) -> Self {
        let mut m = BTreeMap::new();
        if c != 0 {
            m.insert(e, c);
        }
        Self(m)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, i64)> + '_ {
        self.0.iter().map(|(&e, &c)| (e, c))
    }

    pub fn add_assign(&mut self, o: &Self) {
        for (&e, &c) in &o.0 {
            let v = self.0.entry(e).or_insert(0);
            *v += c;
            if *v == 0 {
                self.0.remove(&e);
            }
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::default();
        for (&a, &ca) in &self.0 {
            for (&b, &cb) in &o.0 {
                out.add_assign(&Self::monomial(ca * cb, a + b));
            }
        }
        out
    }

    /// Multiplies by `c A^e`.
    pub fn shift(&self, c: i64, e: i32) -> Self {
        Self(self.0.iter().map(|(&k, &v)| (k + e, v * c)).collect())
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (k, (&e, &c)) in self.0.iter().rev().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            if k == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            match (a, e) {
                (_, 0) => write!(f, "{a}")?,
                (1, 1) => write!(f, "A")?,
                (1, _) => write!(f, "A^{e}")?,
                (_, 1) => write!(f, "{a}*A")?,
                _ => write!(f, "{a}*A^{e}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Laurent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Edge label at a crossing slot, and whether the edge starts there.
type Slot = (usize, bool);

/// One passage of the curve through a crossing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Passage {
    pub crossing: usize,
    pub over: bool,
}

/// Sequence of passages along the knot, with the sign of every crossing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GaussCode {
    pub passages: Vec<Passage>,
    pub signs: Vec<i8>,
}

/// A spot where a finger move creates two crossings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct R2Site {
    /// Edge labels pushed over and under, with their traversal sense along the face.
    pub over_edge: (usize, bool),
    pub under_edge: (usize, bool),
}

impl GaussCode {
    pub fn crossings(&self) -> usize {
        self.signs.len()
    }

    pub fn writhe(&self) -> i32 {
        self.signs.iter().map(|&s| s as i32).sum()
    }

    /// `+k` for an over passage of crossing `k`, `-k` for an under passage (1-based).
    pub fn signed_sequence(&self) -> Vec<i64> {
        self.passages
            .iter()
            .map(|p| {
                let k = p.crossing as i64 + 1;
                if p.over {
                    k
                } else {
                    -k
                }
            })
            .collect()
    }

    /// Renumbers crossings by first appearance.
    fn compact(&self) -> GaussCode {
        let mut map = BTreeMap::new();
        let mut signs = Vec::new();
        let passages = self
            .passages
            .iter()
            .map(|p| {
                let next = map.len();
                let id = *map.entry(p.crossing).or_insert_with(|| {
                    signs.push(self.signs[p.crossing]);
                    next
                });
                Passage { crossing: id, over: p.over }
            })
            .collect();
        GaussCode { passages, signs }
    }

    /// Checks that every crossing appears once over and once under.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![(0, 0); self.crossings()];
        for p in &self.passages {
            let s = seen
                .get_mut(p.crossing)
                .ok_or_else(|| Error::Input("crossing index out of range".into()))?;
            if p.over {
                s.0 += 1;
            } else {
                s.1 += 1;
            }
        }
        if seen.iter().all(|&s| s == (1, 1)) {
            Ok(())
        } else {
            Err(Error::Input("every crossing needs one over and one under passage".into()))
        }
    }

    /// Planar diagram code: per crossing the four edges counterclockwise from the incoming
    /// under edge. Edge `k` runs from passage `k` to passage `k + 1`.
    fn pd(&self) -> Vec<[Slot; 4]> {
        let n = self.passages.len();
        let mut under = vec![0; self.crossings()];
        let mut over = vec![0; self.crossings()];
        for (k, p) in self.passages.iter().enumerate() {
            if p.over {
                over[p.crossing] = k;
            } else {
                under[p.crossing] = k;
            }
        }
        (0..self.crossings())
            .map(|c| {
                let (i, j) = (under[c], over[c]);
                let (ip, jp) = ((i + n - 1) % n, (j + n - 1) % n);
                if self.signs[c] > 0 {
                    [(ip, false), (j, true), (i, true), (jp, false)]
                } else {
                    [(ip, false), (jp, false), (i, true), (j, true)]
                }
            })
            .collect()
    }

    /// Faces of the diagram as cycles of `(crossing, slot)` left along the boundary.
    fn faces(&self, pd: &[[Slot; 4]]) -> Vec<Vec<(usize, usize)>> {
        let mut occ: BTreeMap<(usize, bool), (usize, usize)> = BTreeMap::new();
        for (x, slots) in pd.iter().enumerate() {
            for (s, &(label, tail)) in slots.iter().enumerate() {
                occ.insert((label, tail), (x, s));
            }
        }
        let mut used = vec![[false; 4]; pd.len()];
        let mut faces = Vec::new();
        for x0 in 0..pd.len() {
            for s0 in 0..4 {
                if used[x0][s0] {
                    continue;
                }
                let mut face = Vec::new();
                let (mut x, mut s) = (x0, s0);
                while !used[x][s] {
                    used[x][s] = true;
                    face.push((x, s));
                    let (label, tail) = pd[x][s];
                    let (x2, s2) = occ[&(label, !tail)];
                    x = x2;
                    s = (s2 + 3) % 4;
                }
                faces.push(face);
            }
        }
        faces
    }

    fn remove(&self, drop: &[usize]) -> GaussCode {
        let passages = self
            .passages
            .iter()
            .copied()
            .filter(|p| !drop.contains(&p.crossing))
            .collect();
        GaussCode {
            passages,
            signs: self.signs.clone(),
        }
        .compact()
    }

    /// Crossings whose two passages are consecutive.
    pub fn r1_sites(&self) -> Vec<usize> {
        let n = self.passages.len();
        let mut out: Vec<usize> = (0..n)
            .filter(|&k| self.passages[k].crossing == self.passages[(k + 1) % n].crossing)
            .map(|k| self.passages[k].crossing)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Crossing pairs bounding a bigon face with one strand over both.
    pub fn r2_sites(&self) -> Vec<(usize, usize)> {
        let n = self.passages.len();
        let pd = self.pd();
        let mut out = Vec::new();
        for face in self.faces(&pd) {
            if face.len() != 2 || face[0].0 == face[1].0 {
                continue;
            }
            let kind = |(x, s): (usize, usize)| {
                let e = pd[x][s].0;
                (self.passages[e].over, self.passages[(e + 1) % n].over)
            };
            let (k0, k1) = (kind(face[0]), kind(face[1]));
            let ok = matches!((k0, k1), ((true, true), (false, false)) | ((false, false), (true, true)));
            if ok {
                let (a, b) = (face[0].0.min(face[1].0), face[0].0.max(face[1].0));
                out.push((a, b));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn apply_r1(&self, crossing: usize) -> GaussCode {
        self.remove(&[crossing])
    }

    pub fn apply_r2(&self, pair: (usize, usize)) -> GaussCode {
        self.remove(&[pair.0, pair.1])
    }

    /// Adds a kink on edge `edge` (after passage `edge`).
    pub fn insert_r1(&self, edge: usize, over_first: bool, sign: i8) -> GaussCode {
        let c = self.crossings();
        let mut out = self.clone();
        out.signs.push(sign);
        let at = if self.passages.is_empty() { 0 } else { edge % self.passages.len() + 1 };
        out.passages.insert(at, Passage { crossing: c, over: !over_first });
        out.passages.insert(at, Passage { crossing: c, over: over_first });
        out.compact()
    }

    /// Pairs of distinct edges sharing a face.
    pub fn r2_insertion_sites(&self) -> Vec<R2Site> {
        let pd = self.pd();
        let mut out = Vec::new();
        for face in self.faces(&pd) {
            for a in 0..face.len() {
                for b in 0..face.len() {
                    let (ea, eb) = (pd[face[a].0][face[a].1], pd[face[b].0][face[b].1]);
                    if a != b && ea.0 != eb.0 {
                        out.push(R2Site {
                            over_edge: ea,
                            under_edge: eb,
                        });
                    }
                }
            }
        }
        out
    }

    /// Finger move of the over edge across the face, over the under edge.
    pub fn insert_r2(&self, site: R2Site) -> GaussCode {
        let (c, d) = (self.crossings(), self.crossings() + 1);
        let (e1, f1) = site.over_edge;
        let (e2, f2) = site.under_edge;
        // along the face boundary the over edge meets (c, d) and the under edge (d, c)
        let sense = |f: bool| if f { 1i8 } else { -1 };
        let sc = sense(f1) * sense(f2);
        let mut out = self.clone();
        out.signs.push(sc);
        out.signs.push(-sc);
        let seq1 = if f1 { [c, d] } else { [d, c] };
        let seq2 = if f2 { [d, c] } else { [c, d] };
        let mut inserts = [(e1, seq1, true), (e2, seq2, false)];
        inserts.sort_by_key(|t| std::cmp::Reverse(t.0));
        for (e, seq, over) in inserts {
            let at = e + 1;
            out.passages.insert(at, Passage { crossing: seq[1], over });
            out.passages.insert(at, Passage { crossing: seq[0], over });
        }
        out.compact()
    }

    /// Applies R1 and R2 removals until none is available.
    pub fn reduce(&self) -> GaussCode {
        let mut cur = self.compact();
        loop {
            if let Some(&c) = cur.r1_sites().first() {
                cur = cur.apply_r1(c);
                continue;
            }
            if let Some(&p) = cur.r2_sites().first() {
                cur = cur.apply_r2(p);
                continue;
            }
            return cur;
        }
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut a = a;
        while self.0[a] != r {
            let next = self.0[a];
            self.0[a] = r;
            a = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}

/// Kauffman bracket by the state sum, normalized to 1 on the trivial diagram.
pub fn bracket(code: &GaussCode) -> Option<Laurent> {
    let c = code.crossings();
    if c > MAX_CROSSINGS {
        return None;
    }
    if c == 0 {
        return Some(Laurent::one());
    }
    let pd = code.pd();
    let n = code.passages.len();
    // delta = -A^2 - A^-2
    let delta = {
        let mut d = Laurent::monomial(-1, 2);
        d.add_assign(&Laurent::monomial(-1, -2));
        d
    };
    let mut powers = vec![Laurent::one()];
    for k in 1..=n {
        let next = powers[k - 1].mul(&delta);
        powers.push(next);
    }
    let mut loops_by_state = BTreeMap::<(i32, usize), i64>::new();
    for state in 0u32..(1 << c) {
        let mut dsu = Dsu((0..n).collect());
        let mut loops = n;
        let mut a_count = 0i32;
        for (x, s) in pd.iter().enumerate() {
            let l = s.map(|t| t.0);
            let (p, q) = if state >> x & 1 == 0 {
                a_count += 1;
                ((l[0], l[1]), (l[2], l[3]))
            } else {
                ((l[0], l[3]), (l[1], l[2]))
            };
            loops -= dsu.union(p.0, p.1) as usize;
            loops -= dsu.union(q.0, q.1) as usize;
        }
        *loops_by_state.entry((2 * a_count - c as i32, loops)).or_insert(0) += 1;
    }
    let mut out = Laurent::default();
    for ((e, loops), mult) in loops_by_state {
        out.add_assign(&powers[loops - 1].shift(mult, e));
    }
    Some(out)
}

/// `(-A^3)^(-w) <D>`, invariant under all three Reidemeister moves.
pub fn normalized_bracket(code: &GaussCode) -> Option<Laurent> {
    let w = code.writhe();
    let sign = if w % 2 == 0 { 1 } else { -1 };
    bracket(code).map(|b| b.shift(sign, -3 * w))
}

/// Crossing found between two segments of a closed planar polyline.
#[derive(Clone, Copy, Debug)]
struct RawCrossing {
    over_pos: f64,
    under_pos: f64,
    sign: i8,
}

/// Crossings of a closed polyline given in the plane with a height per vertex.
pub fn gauss_code_of_polyline(plane: &[[f64; 2]], height: &[f64]) -> Result<(GaussCode, Vec<[f64; 2]>)> {
    let n = plane.len();
    if n < 3 {
        return Err(Error::Input("polyline needs at least 3 points".into()));
    }
    let span = plane
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let seg = |i: usize| (plane[i], plane[(i + 1) % n]);
    let bbox: Vec<[f64; 4]> = (0..n)
        .map(|i| {
            let (a, b) = seg(i);
            [a[0].min(b[0]), a[0].max(b[0]), a[1].min(b[1]), a[1].max(b[1])]
        })
        .collect();
    let mut raw = Vec::new();
    let mut points = Vec::new();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (bi, bj) = (bbox[i], bbox[j]);
            if bi[1] < bj[0] || bj[1] < bi[0] || bi[3] < bj[2] || bj[3] < bi[2] {
                continue;
            }
            let (p, p2) = seg(i);
            let (q, q2) = seg(j);
            let r = [p2[0] - p[0], p2[1] - p[1]];
            let s = [q2[0] - q[0], q2[1] - q[1]];
            let den = r[0] * s[1] - r[1] * s[0];
            let rs = (r[0].hypot(r[1]) * s[0].hypot(s[1])).max(1e-300);
            let qp = [q[0] - p[0], q[1] - p[1]];
            let t = (qp[0] * s[1] - qp[1] * s[0]) / den;
            let u = (qp[0] * r[1] - qp[1] * r[0]) / den;
            if den == 0.0 || !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&u) {
                continue;
            }
            if (den / rs).abs() < 1e-9 {
                return Err(Error::NonGeneric("crossing strands are tangent".into()));
            }
            if t < 1e-12 || t > 1.0 - 1e-12 || u < 1e-12 || u > 1.0 - 1e-12 {
                return Err(Error::NonGeneric("crossing at a polyline vertex".into()));
            }
            let hi = height[i] + t * (height[(i + 1) % n] - height[i]);
            let hj = height[j] + u * (height[(j + 1) % n] - height[j]);
            if (hi - hj).abs() < 1e-12 * span {
                return Err(Error::NonGeneric("double point of the space curve".into()));
            }
            let (pi, pj) = (i as f64 + t, j as f64 + u);
            let (over_pos, under_pos, o, un) = if hi > hj { (pi, pj, r, s) } else { (pj, pi, s, r) };
            let cross = o[0] * un[1] - o[1] * un[0];
            raw.push(RawCrossing {
                over_pos,
                under_pos,
                sign: if cross > 0.0 { 1 } else { -1 },
            });
            points.push([p[0] + t * r[0], p[1] + t * r[1]]);
        }
    }
    let mut events: Vec<(f64, Passage)> = Vec::new();
    for (k, c) in raw.iter().enumerate() {
        events.push((c.over_pos, Passage { crossing: k, over: true }));
        events.push((c.under_pos, Passage { crossing: k, over: false }));
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let code = GaussCode {
        passages: events.into_iter().map(|e| e.1).collect(),
        signs: raw.iter().map(|c| c.sign).collect(),
    };
    Ok((code, points))
}

/// SVG 1.1 drawing of a closed planar polyline with gaps where it passes under.
pub fn svg(plane: &[[f64; 2]], height: &[f64]) -> String {
    let n = plane.len();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in plane {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let size = 400.0;
    let w = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
    let map = |p: [f64; 2]| [20.0 + (p[0] - lo[0]) / w * size, 20.0 + (hi[1] - p[1]) / w * size];
    let gap = w * 0.02;
    // under passages, as positions along the polyline
    let mut under: Vec<[f64; 2]> = Vec::new();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (p, p2, q, q2) = (plane[i], plane[(i + 1) % n], plane[j], plane[(j + 1) % n]);
            let r = [p2[0] - p[0], p2[1] - p[1]];
            let s = [q2[0] - q[0], q2[1] - q[1]];
            let den = r[0] * s[1] - r[1] * s[0];
            if den == 0.0 {
                continue;
            }
            let qp = [q[0] - p[0], q[1] - p[1]];
            let t = (qp[0] * s[1] - qp[1] * s[0]) / den;
            let u = (qp[0] * r[1] - qp[1] * r[0]) / den;
            if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
                let hi_ = height[i] + t * (height[(i + 1) % n] - height[i]);
                let hj = height[j] + u * (height[(j + 1) % n] - height[j]);
                under.push(if hi_ < hj { [i as f64, t] } else { [j as f64, u] });
            }
        }
    }
    let hidden = |i: usize| {
        under.iter().any(|c| {
            let k = c[0] as usize;
            let at = [
                plane[k][0] + c[1] * (plane[(k + 1) % n][0] - plane[k][0]),
                plane[k][1] + c[1] * (plane[(k + 1) % n][1] - plane[k][1]),
            ];
            (plane[i][0] - at[0]).hypot(plane[i][1] - at[1]) < gap
        })
    };
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="440" height="440" viewBox="0 0 440 440">"#
    );
    let mut run: Vec<[f64; 2]> = Vec::new();
    let flush = |run: &mut Vec<[f64; 2]>, out: &mut String| {
        if run.len() >= 2 {
            let pts: Vec<String> = run.iter().map(|p| format!("{:.2},{:.2}", p[0], p[1])).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="black" stroke-width="2" points="{}"/>"#,
                pts.join(" ")
            );
        }
        run.clear();
    };
    for i in 0..=n {
        let k = i % n;
        if hidden(k) {
            flush(&mut run, &mut out);
        } else {
            run.push(map(plane[k]));
        }
    }
    flush(&mut run, &mut out);
    let _ = writeln!(out, "</svg>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(seq: &[i64], signs: &[i8]) -> GaussCode {
        GaussCode {
            passages: seq
                .iter()
                .map(|&k| Passage {
                    crossing: k.unsigned_abs() as usize - 1,
                    over: k > 0,
                })
                .collect(),
            signs: signs.to_vec(),
        }
    }

    #[test]
    fn unknot_and_kinks() {
        assert_eq!(normalized_bracket(&GaussCode::default()), Some(Laurent::one()));
        for s in [1, -1] {
            let k = code(&[1, -1], &[s]);
            assert_eq!(normalized_bracket(&k), Some(Laurent::one()));
            assert_eq!(k.reduce().crossings(), 0);
        }
    }

    #[test]
    fn trefoil_is_reduced_and_nontrivial() {
        let t = code(&[1, -2, 3, -1, 2, -3], &[1, 1, 1]);
        assert!(t.r1_sites().is_empty());
        assert!(t.r2_sites().is_empty());
        let f = normalized_bracket(&t).unwrap();
        assert_ne!(f, Laurent::one());
        assert_eq!(f.to_string(), "A^-4 + A^-12 - A^-16");
    }

    #[test]
    fn r2_pair_is_removed() {
        // two opposite crossings between parallel strands of the unknot
        let u = GaussCode::default().insert_r1(0, true, 1);
        for site in u.r2_insertion_sites() {
            let v = u.insert_r2(site);
            v.validate().unwrap();
            assert_eq!(normalized_bracket(&v), Some(Laurent::one()), "{:?}", v);
            assert_eq!(v.reduce().crossings(), 0);
        }
    }
}
