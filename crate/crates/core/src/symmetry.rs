//! Configurations modulo the symmetry group of the field: rotations about
//! the `z` axis, reflections through planes containing it, and relabelings
//! of the electrons.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Configuration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    /// Sorted heights, then sorted cylinder radii, then the sorted pairwise
    /// distances. Unchanged by every group element.
    pub invariant_key: Vec<f64>,
    /// Representative with the outermost electron at azimuth zero.
    pub oriented: Configuration,
}

impl CanonicalForm {
    /// Largest componentwise difference between two keys; infinite when the
    /// keys belong to different electron counts.
    pub fn key_distance(&self, other: &CanonicalForm) -> f64 {
        key_distance(&self.invariant_key, &other.invariant_key)
    }

    /// Key rounded to multiples of `precision`, for exact comparisons and
    /// ordering.
    pub fn rounded_key(&self, precision: f64) -> Vec<i64> {
        self.invariant_key
            .iter()
            .map(|v| (v / precision).round() as i64)
            .collect()
    }
}

fn key_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Rendered as `C1`, `Cv`, `C2v`, ... and serialized the same way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct SymmetryLabel {
    pub rotation_order: usize,
    pub has_mirror: bool,
}

impl fmt::Display for SymmetryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rotation_order, self.has_mirror) {
            (1, true) => write!(f, "Cv"),
            (k, true) => write!(f, "C{k}v"),
            (k, false) => write!(f, "C{k}"),
        }
    }
}

impl std::str::FromStr for SymmetryLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_prefix('C')
            .ok_or_else(|| format!("symmetry label must start with 'C': {s:?}"))?;
        let (digits, has_mirror) = match body.strip_suffix('v') {
            Some(d) => (d, true),
            None => (body, false),
        };
        let rotation_order = if digits.is_empty() && has_mirror {
            1
        } else {
            digits
                .parse()
                .map_err(|_| format!("bad rotation order in {s:?}"))?
        };
        if rotation_order == 0 {
            return Err(format!("rotation order must be positive in {s:?}"));
        }
        Ok(SymmetryLabel {
            rotation_order,
            has_mirror,
        })
    }
}

impl From<SymmetryLabel> for String {
    fn from(l: SymmetryLabel) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for SymmetryLabel {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

fn cylindrical(p: &[f64; 3]) -> (f64, f64, f64) {
    let rho = p[0].hypot(p[1]);
    let phi = p[1].atan2(p[0]).rem_euclid(2.0 * PI);
    (rho, phi, p[2])
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn invariant_key(config: &Configuration) -> Vec<f64> {
    let pos = &config.positions;
    let n = pos.len();
    let mut z: Vec<f64> = pos.iter().map(|p| p[2]).collect();
    let mut rho: Vec<f64> = pos.iter().map(|p| p[0].hypot(p[1])).collect();
    let mut dist = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            dist.push(distance(&pos[i], &pos[j]));
        }
    }
    z.sort_by(f64::total_cmp);
    rho.sort_by(f64::total_cmp);
    dist.sort_by(f64::total_cmp);
    z.into_iter().chain(rho).chain(dist).collect()
}

/// Whether every point of `a` has its own partner in `b` within `tol`.
fn same_point_set(a: &[[f64; 3]], b: &[[f64; 3]], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for p in a {
        let hit = b
            .iter()
            .enumerate()
            .filter(|&(j, _)| !used[j])
            .map(|(j, q)| (j, distance(p, q)))
            .filter(|&(_, d)| d <= tol)
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match hit {
            Some((j, _)) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Radius below which an electron counts as sitting on the field axis.
fn axis_tol(tol: f64) -> f64 {
    tol.max(1e-9)
}

pub fn canonicalize(config: &Configuration, tol: f64) -> CanonicalForm {
    CanonicalForm {
        invariant_key: invariant_key(config),
        oriented: orient(config, tol),
    }
}

fn quantize(v: f64, tol: f64) -> i64 {
    (v / tol).round() as i64
}

/// Puts the electron with the largest `(ρ, z)` at azimuth zero. Among
/// near-tied anchors and the two reflections, the orientation whose
/// height-ordered azimuth sequence is lexicographically smallest wins.
fn orient(config: &Configuration, tol: f64) -> Configuration {
    let cyl: Vec<_> = config.positions.iter().map(cylindrical).collect();
    let best = cyl
        .iter()
        .map(|&(r, _, z)| (r, z))
        .max_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let Some((rho_max, z_top)) = best else {
        return config.clone();
    };
    if rho_max <= axis_tol(tol) {
        return sorted_by_height(config.clone(), tol);
    }
    let mut winner: Option<(Vec<(i64, i64, f64)>, Configuration)> = None;
    for &(r, phi, z) in &cyl {
        if (r - rho_max).abs() > tol || (z - z_top).abs() > tol {
            continue;
        }
        for mirror in [false, true] {
            let mut c = config.rotated(-phi);
            if mirror {
                c = c.reflected(0.0);
            }
            let c = sorted_by_height(c, tol);
            let seq: Vec<(i64, i64, f64)> = c
                .positions
                .iter()
                .map(|p| {
                    let (r, phi, z) = cylindrical(p);
                    let phi = if r <= axis_tol(tol) || phi > 2.0 * PI - tol { 0.0 } else { phi };
                    (quantize(z, tol), quantize(r, tol), phi)
                })
                .collect();
            let better = match &winner {
                None => true,
                Some((s, _)) => cmp_seq(&seq, s) == Ordering::Less,
            };
            if better {
                winner = Some((seq, c));
            }
        }
    }
    winner.map(|(_, c)| c).unwrap_or_else(|| config.clone())
}

fn cmp_seq(a: &[(i64, i64, f64)], b: &[(i64, i64, f64)]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.0.cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.total_cmp(&y.2));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

fn sorted_by_height(mut c: Configuration, tol: f64) -> Configuration {
    c.positions.sort_by(|a, b| {
        let (ra, pa, za) = cylindrical(a);
        let (rb, pb, zb) = cylindrical(b);
        quantize(za, tol)
            .cmp(&quantize(zb, tol))
            .then(quantize(ra, tol).cmp(&quantize(rb, tol)))
            .then(pa.total_cmp(&pb))
    });
    c
}

/// Tries to map `a` onto `b` with a group element; positions must agree to
/// `tol`.
pub fn aligned(a: &Configuration, b: &Configuration, tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let ca: Vec<_> = a.positions.iter().map(cylindrical).collect();
    let cb: Vec<_> = b.positions.iter().map(cylindrical).collect();
    let Some(anchor) = (0..ca.len()).max_by(|&i, &j| ca[i].0.total_cmp(&ca[j].0)) else {
        return true;
    };
    let (ra, phi_a, za) = ca[anchor];
    if ra <= axis_tol(tol) {
        return same_point_set(&a.positions, &b.positions, tol);
    }
    for &(rb, phi_b, zb) in &cb {
        if (rb - ra).abs() > tol || (zb - za).abs() > tol {
            continue;
        }
        for mirror in [false, true] {
            let moved = if mirror {
                a.reflected(phi_a).rotated(phi_b - phi_a)
            } else {
                a.rotated(phi_b - phi_a)
            };
            if same_point_set(&moved.positions, &b.positions, tol) {
                return true;
            }
        }
    }
    false
}

/// Equal invariant keys at `tol`, confirmed by an explicit alignment.
pub fn equivalent(a: &Configuration, b: &Configuration, tol: f64) -> bool {
    key_distance(&invariant_key(a), &invariant_key(b)) <= tol && aligned(a, b, 10.0 * tol)
}

pub fn classify(config: &Configuration, tol: f64) -> SymmetryLabel {
    let n = config.len();
    let pos = &config.positions;
    let rotation_order = (2..=2 * n.max(1))
        .rev()
        .find(|&k| same_point_set(&config.rotated(2.0 * PI / k as f64).positions, pos, tol))
        .unwrap_or(1);

    let cyl: Vec<_> = pos.iter().map(cylindrical).collect();
    let off_axis: Vec<usize> = (0..n).filter(|&i| cyl[i].0 > axis_tol(tol)).collect();
    let mut planes: Vec<f64> = off_axis.iter().map(|&i| cyl[i].1).collect();
    for (a, &i) in off_axis.iter().enumerate() {
        for &j in &off_axis[a + 1..] {
            if (cyl[i].0 - cyl[j].0).abs() <= tol && (cyl[i].2 - cyl[j].2).abs() <= tol {
                planes.push(0.5 * (cyl[i].1 + cyl[j].1));
            }
        }
    }
    let has_mirror = off_axis.is_empty()
        || planes
            .iter()
            .any(|&alpha| same_point_set(&config.reflected(alpha).positions, pos, tol));
    SymmetryLabel {
        rotation_order,
        has_mirror,
    }
}
