//! Bowyer–Watson Delaunay triangulation of planar point sets.

use std::collections::HashMap;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DelaunayError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all points are collinear")]
    CollinearInput,
    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("triangulation failed to cover the convex hull")]
    HullNotCovered,
}

/// Relative tolerance on the normalised incircle determinant.
pub const INCIRCLE_TOLERANCE: f64 = 1e-10;

/// Sine of the angle below which three points count as collinear.
const COLLINEAR_TOLERANCE: f64 = 1e-12;

const SUPER_TRIANGLE_ATTEMPTS: u32 = 4;

/// Counter-clockwise triangles over the input point indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    /// Undirected edges `(i, j)` with `i < j`, sorted and deduplicated.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

/// Twice the signed area of `(a, b, c)`; positive when counter-clockwise.
#[inline]
pub fn orient<T: Scalar>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Incircle determinant of `d` against the counter-clockwise triangle
/// `(a, b, c)`, scaled to be dimensionless. Positive means `d` lies inside
/// the circumcircle.
pub fn incircle_normalized<T: Scalar>(a: [T; 2], b: [T; 2], c: [T; 2], d: [T; 2]) -> T {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    let det = ad * (bdx * cdy - bdy * cdx) - bd * (adx * cdy - ady * cdx) + cd * (adx * bdy - ady * bdx);
    let scale = ad + bd + cd;
    if scale == T::zero() {
        return T::zero();
    }
    det / (scale * scale)
}

fn is_collinear<T: Scalar>(a: [T; 2], b: [T; 2], c: [T; 2]) -> bool {
    let ab = (b[0] - a[0]).hypot(b[1] - a[1]);
    let ac = (c[0] - a[0]).hypot(c[1] - a[1]);
    let denom = ab * ac;
    denom == T::zero() || (orient(a, b, c) / denom).abs() <= T::lit(COLLINEAR_TOLERANCE)
}

/// Delaunay triangulation of `points`.
///
/// Points are inserted in input order into a super-triangle; cocircular
/// quadruples are resolved afterwards towards the lexicographically smaller
/// diagonal so the output does not depend on insertion order.
pub fn delaunay<T: Scalar>(points: &[[T; 2]]) -> Result<Triangulation, DelaunayError> {
    let n = points.len();
    if n < 3 {
        return Err(DelaunayError::TooFewPoints(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        points[i]
            .partial_cmp(&points[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(DelaunayError::DuplicatePoints(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    if (2..n).all(|k| is_collinear(points[0], points[1], points[k])) {
        return Err(DelaunayError::CollinearInput);
    }

    let hull = convex_hull(points);
    let mut margin = T::lit(20.0);
    for _ in 0..SUPER_TRIANGLE_ATTEMPTS {
        let tri = bowyer_watson(points, margin);
        if is_complete(&tri, &hull, n) {
            return Ok(finish(points, tri));
        }
        margin *= T::lit(10.0);
    }
    // nearly collinear hull triples keep a super vertex inside their
    // circumcircle at any finite margin; flip a sweep triangulation instead
    let tri = sweep(points);
    if is_complete(&tri, &hull, n) {
        return Ok(finish(points, tri));
    }
    Err(DelaunayError::HullNotCovered)
}

fn finish<T: Scalar>(points: &[[T; 2]], mut tri: Vec<[usize; 3]>) -> Triangulation {
    legalize(points, &mut tri);
    for t in &mut tri {
        let lowest = (0..3).min_by_key(|&k| t[k]).unwrap_or(0);
        t.rotate_left(lowest);
    }
    tri.sort_unstable();
    Triangulation { triangles: tri }
}

/// Every point used, every hull edge present and the Euler triangle count.
fn is_complete(triangles: &[[usize; 3]], hull: &[usize], n: usize) -> bool {
    let mut used = vec![false; n];
    for t in triangles {
        for &v in t {
            used[v] = true;
        }
    }
    triangles.len() + 2 + hull.len() == 2 * n && used.iter().all(|&u| u) && covers_hull(triangles, hull)
}

/// Some triangulation of the convex hull: points join in lexicographic
/// order, each connected to every hull edge it sees.
fn sweep<T: Scalar>(points: &[[T; 2]]) -> Vec<[usize; 3]> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        points[i]
            .partial_cmp(&points[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let Some(k) = (2..idx.len()).find(|&k| orient(points[idx[0]], points[idx[1]], points[idx[k]]) != T::zero())
    else {
        return Vec::new();
    };
    let apex = idx[k];
    let mut triangles = Vec::new();
    let mut hull: Vec<usize>;
    if orient(points[idx[0]], points[idx[k - 1]], points[apex]) > T::zero() {
        for w in idx[..k].windows(2) {
            triangles.push([w[0], w[1], apex]);
        }
        hull = idx[..k].to_vec();
        hull.push(apex);
    } else {
        for w in idx[..k].windows(2) {
            triangles.push([w[1], w[0], apex]);
        }
        hull = vec![idx[0], apex];
        hull.extend(idx[1..k].iter().rev());
    }
    for &p in &idx[k + 1..] {
        let m = hull.len();
        let visible: Vec<bool> = (0..m)
            .map(|e| orient(points[hull[e]], points[hull[(e + 1) % m]], points[p]) < T::zero())
            .collect();
        let Some(first) = (0..m).find(|&e| visible[e] && !visible[(e + m - 1) % m]) else {
            continue;
        };
        let start = hull[first];
        let mut e = first;
        let mut interior = Vec::new();
        while visible[e] {
            let (a, b) = (hull[e], hull[(e + 1) % m]);
            triangles.push([b, a, p]);
            e = (e + 1) % m;
            if visible[e] {
                interior.push(hull[e]);
            }
        }
        hull.retain(|v| !interior.contains(v));
        let at = hull.iter().position(|&v| v == start).expect("start stays on the hull");
        hull.insert(at + 1, p);
    }
    triangles
}

fn bowyer_watson<T: Scalar>(points: &[[T; 2]], margin: T) -> Vec<[usize; 3]> {
    let n = points.len();
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = [lo[0].min(p[0]), lo[1].min(p[1])];
        hi = [hi[0].max(p[0]), hi[1].max(p[1])];
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let half = T::lit(0.5);
    let mid = [(lo[0] + hi[0]) * half, (lo[1] + hi[1]) * half];
    let mut all = points.to_vec();
    all.push([mid[0] - margin * span, mid[1] - span]);
    all.push([mid[0] + margin * span, mid[1] - span]);
    all.push([mid[0], mid[1] + margin * span]);

    let tol = T::lit(INCIRCLE_TOLERANCE);
    let mut triangles: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for p in 0..n {
        let pt = all[p];
        let (bad, good): (Vec<[usize; 3]>, Vec<[usize; 3]>) = triangles
            .into_iter()
            .partition(|t| incircle_normalized(all[t[0]], all[t[1]], all[t[2]], pt) > tol);
        triangles = good;

        // boundary of the cavity: directed edges of bad triangles whose twin
        // is not in another bad triangle
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &bad {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        for t in &bad {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                if count[&(a.min(b), a.max(b))] == 1 {
                    triangles.push([a, b, p]);
                }
            }
        }
    }
    triangles.retain(|t| t.iter().all(|&v| v < n));
    triangles
}

/// Convex hull vertices in counter-clockwise order, collinear boundary
/// points kept.
fn convex_hull<T: Scalar>(points: &[[T; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        points[i]
            .partial_cmp(&points[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let chain = |iter: &mut dyn Iterator<Item = usize>| {
        let mut h: Vec<usize> = Vec::new();
        for i in iter {
            while h.len() >= 2
                && orient(points[h[h.len() - 2]], points[h[h.len() - 1]], points[i]) < T::zero()
            {
                h.pop();
            }
            h.push(i);
        }
        h
    };
    let mut lower = chain(&mut idx.iter().copied());
    let mut upper = chain(&mut idx.iter().rev().copied());
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn covers_hull(triangles: &[[usize; 3]], hull: &[usize]) -> bool {
    let mut edges = std::collections::HashSet::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    (0..hull.len()).all(|k| {
        let (a, b) = (hull[k], hull[(k + 1) % hull.len()]);
        edges.contains(&(a.min(b), a.max(b)))
    })
}

/// Lawson flips: fixes any remaining non-Delaunay edge and turns every
/// cocircular quadrilateral to its lexicographically smaller diagonal.
fn legalize<T: Scalar>(points: &[[T; 2]], triangles: &mut [[usize; 3]]) {
    let tol = T::lit(INCIRCLE_TOLERANCE);
    let max_flips = 4 * triangles.len() * triangles.len() + 16;
    for _ in 0..max_flips {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (ti, t) in triangles.iter().enumerate() {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                owner.insert((a, b), ti);
            }
        }
        let mut flip = None;
        'scan: for (t1, t) in triangles.iter().enumerate() {
            for r in 0..3 {
                let (a, b, c) = (t[r], t[(r + 1) % 3], t[(r + 2) % 3]);
                let Some(&t2) = owner.get(&(b, a)) else { continue };
                let u = triangles[t2];
                let d = u.iter().copied().find(|&v| v != a && v != b).expect("third vertex");
                let det = incircle_normalized(points[a], points[b], points[c], points[d]);
                let current = (a.min(b), a.max(b));
                let other = (c.min(d), c.max(d));
                if det > tol || (det.abs() <= tol && other < current && convex_quad(points, a, d, b, c)) {
                    flip = Some((t1, t2, a, b, c, d));
                    break 'scan;
                }
            }
        }
        match flip {
            Some((t1, t2, a, b, c, d)) => {
                triangles[t1] = [a, d, c];
                triangles[t2] = [d, b, c];
            }
            None => return,
        }
    }
}

fn convex_quad<T: Scalar>(points: &[[T; 2]], a: usize, d: usize, b: usize, c: usize) -> bool {
    let q = [points[a], points[d], points[b], points[c]];
    (0..4).all(|k| orient(q[k], q[(k + 1) % 4], q[(k + 2) % 4]) > T::zero())
}
