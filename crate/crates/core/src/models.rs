//! The linear models `CP^2(a,b;m)` and `S^4(a,b;m)`.
//!
//! A `CP^2(a,b;m)` is the diagonal action `[x0:x1:x2] -> [x0 : z^a x1 : z^b x2]`
//! with `z` a primitive `m`-th root of unity. Its fixed points `p1,p2,p3` are
//! the coordinate points, and the invariant lines `S1,S2,S3` are the lines
//! opposite them. Rotation numbers at the fixed points are
//!
//! * `p1: (a, b)`, `p2: (-a, b-a)`, `p3: (-b, a-b)`;
//!
//! the third is equivalent to `(a-b, -b)` under the weight identification.
//! `S^4(a,b;m)` rotates `R + C + C`; its poles `q1,q2` carry `(a,b)` and
//! `(a,-b)`, and the spheres `T1` (the `z1`-plane, fixed by the subgroup of
//! order `gcd(a,m)`) and `T2` (order `gcd(b,m)`) pass through both poles.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modular::{ArithError, Modulus, PointSite, Rotation, Weight};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("fixed sets are reported for non-trivial subgroups only")]
    TrivialSubgroup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "CP2")]
    Cp2,
    #[serde(rename = "S4")]
    S4,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Cp2 => "CP2",
            ModelKind::S4 => "S4",
        }
    }

    /// Euler characteristic of the underlying manifold.
    pub fn euler(self) -> i64 {
        match self {
            ModelKind::Cp2 => 3,
            ModelKind::S4 => 2,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteKind {
    Point,
    Sphere,
    Free,
}

/// A place on a linear model where a connected sum can be made.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    P1,
    P2,
    P3,
    Q1,
    Q2,
    S1,
    S2,
    S3,
    T1,
    T2,
    Free,
}

impl Site {
    pub const ALL: [Site; 11] = [
        Site::P1,
        Site::P2,
        Site::P3,
        Site::Q1,
        Site::Q2,
        Site::S1,
        Site::S2,
        Site::S3,
        Site::T1,
        Site::T2,
        Site::Free,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Site::P1 => "p1",
            Site::P2 => "p2",
            Site::P3 => "p3",
            Site::Q1 => "q1",
            Site::Q2 => "q2",
            Site::S1 => "S1",
            Site::S2 => "S2",
            Site::S3 => "S3",
            Site::T1 => "T1",
            Site::T2 => "T2",
            Site::Free => "free",
        }
    }

    pub fn kind(self) -> SiteKind {
        match self {
            Site::P1 | Site::P2 | Site::P3 | Site::Q1 | Site::Q2 => SiteKind::Point,
            Site::S1 | Site::S2 | Site::S3 | Site::T1 | Site::T2 => SiteKind::Sphere,
            Site::Free => SiteKind::Free,
        }
    }

    pub fn is_point(self) -> bool {
        self.kind() == SiteKind::Point
    }

    pub fn is_sphere(self) -> bool {
        self.kind() == SiteKind::Sphere
    }

    pub fn point_site(self) -> Option<PointSite> {
        match self {
            Site::P1 => Some(PointSite::P1),
            Site::P2 => Some(PointSite::P2),
            Site::P3 => Some(PointSite::P3),
            _ => None,
        }
    }

    /// Whether the label names something on a model of this kind.
    pub fn belongs_to(self, kind: ModelKind) -> bool {
        match self {
            Site::Free => true,
            Site::P1 | Site::P2 | Site::P3 | Site::S1 | Site::S2 | Site::S3 => kind == ModelKind::Cp2,
            Site::Q1 | Site::Q2 | Site::T1 | Site::T2 => kind == ModelKind::S4,
        }
    }

    /// Homogeneous coordinate index attached to a `CP^2` label: `p_i` is the
    /// `(i-1)`-th coordinate point and `S_i` the line where it vanishes.
    fn cp2_coordinate(self) -> Option<usize> {
        match self {
            Site::P1 | Site::S1 => Some(0),
            Site::P2 | Site::S2 => Some(1),
            Site::P3 | Site::S3 => Some(2),
            _ => None,
        }
    }

    fn cp2_with_coordinate(self, i: usize) -> Site {
        match (self.is_point(), i) {
            (true, 0) => Site::P1,
            (true, 1) => Site::P2,
            (true, 2) => Site::P3,
            (false, 0) => Site::S1,
            (false, 1) => Site::S2,
            (false, 2) => Site::S3,
            _ => unreachable!("coordinate index out of range"),
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Site {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Site::ALL
            .iter()
            .copied()
            .find(|site| site.label() == s)
            .ok_or_else(|| format!("unknown site label {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPointRecord {
    pub label: Site,
    pub rotation: Rotation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SphereRecord {
    pub label: Site,
    /// Order of the subgroup fixing the sphere pointwise.
    pub order: u64,
    /// Rotation in the normal direction, modulo `order`, taken up to sign
    /// (the representative in `[0, order/2]`).
    pub normal: u64,
    pub poles: [Site; 2],
}

impl SphereRecord {
    pub fn is_singular(&self) -> bool {
        self.order > 1
    }
}

/// Components of `Fix(model, C_d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixStructure {
    pub points: Vec<FixedPointRecord>,
    pub spheres: Vec<SphereRecord>,
}

impl FixStructure {
    pub fn euler(&self) -> i64 {
        self.points.len() as i64 + 2 * self.spheres.len() as i64
    }
}

/// A relabeling of a linear model that preserves the action up to
/// equivariant orientation-preserving diffeomorphism.
///
/// On `CP^2` these are permutations of the homogeneous coordinates combined
/// with complex conjugation (12 elements). On `S^4` they are the exchange of
/// the two complex planes combined with conjugation of either plane, the
/// latter composed with `x -> -x` to keep orientation (8 elements).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relabeling {
    Cp2 { perm: [usize; 3], negate: bool },
    S4 { swap: bool, neg_first: bool, neg_second: bool },
}

const PERMUTATIONS: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

impl Relabeling {
    pub fn all(kind: ModelKind) -> Vec<Relabeling> {
        let mut out = Vec::new();
        match kind {
            ModelKind::Cp2 => {
                for perm in PERMUTATIONS {
                    for negate in [false, true] {
                        out.push(Relabeling::Cp2 { perm, negate });
                    }
                }
            }
            ModelKind::S4 => {
                for swap in [false, true] {
                    for neg_first in [false, true] {
                        for neg_second in [false, true] {
                            out.push(Relabeling::S4 { swap, neg_first, neg_second });
                        }
                    }
                }
            }
        }
        out
    }

    /// The representative of the same action in the new labeling.
    pub fn apply(&self, r: Rotation) -> Rotation {
        let m = r.modulus();
        match *self {
            Relabeling::Cp2 { perm, negate } => {
                let e = [0i64, r.a() as i64, r.b() as i64];
                let s = if negate { -1 } else { 1 };
                let base = e[perm[0]];
                Rotation::new(s * (e[perm[1]] - base), s * (e[perm[2]] - base), m)
            }
            Relabeling::S4 { swap, neg_first, neg_second } => {
                let a = if neg_first { -(r.a() as i64) } else { r.a() as i64 };
                let b = if neg_second { -(r.b() as i64) } else { r.b() as i64 };
                if swap {
                    Rotation::new(b, a, m)
                } else {
                    Rotation::new(a, b, m)
                }
            }
        }
    }

    /// Where an old label lands.
    pub fn map_site(&self, site: Site) -> Site {
        if site == Site::Free {
            return site;
        }
        match *self {
            Relabeling::Cp2 { perm, .. } => {
                let Some(i) = site.cp2_coordinate() else { return site };
                let j = perm.iter().position(|&p| p == i).expect("perm is a bijection");
                site.cp2_with_coordinate(j)
            }
            Relabeling::S4 { swap, neg_first, neg_second } => match site {
                Site::Q1 | Site::Q2 => {
                    if neg_first != neg_second {
                        if site == Site::Q1 {
                            Site::Q2
                        } else {
                            Site::Q1
                        }
                    } else {
                        site
                    }
                }
                Site::T1 if swap => Site::T2,
                Site::T2 if swap => Site::T1,
                other => other,
            },
        }
    }
}

/// A linear action on `CP^2` or `S^4`, written in a fixed representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LinearModel {
    kind: ModelKind,
    rot: Rotation,
}

impl LinearModel {
    pub fn new(kind: ModelKind, rot: Rotation) -> Result<Self, ArithError> {
        rot.weight()?;
        Ok(LinearModel { kind, rot })
    }

    pub fn cp2(a: i64, b: i64, m: u64) -> Result<Self, ArithError> {
        Self::new(ModelKind::Cp2, Rotation::new(a, b, Modulus::new(m)?))
    }

    pub fn s4(a: i64, b: i64, m: u64) -> Result<Self, ArithError> {
        Self::new(ModelKind::S4, Rotation::new(a, b, Modulus::new(m)?))
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn rotation(&self) -> Rotation {
        self.rot
    }

    pub fn weight(&self) -> Weight {
        self.rot.weight().expect("checked at construction")
    }

    pub fn modulus(&self) -> Modulus {
        self.rot.modulus()
    }

    pub fn order(&self) -> u64 {
        self.rot.modulus().get()
    }

    /// Labels that exist on this model, points before spheres.
    pub fn sites(&self) -> &'static [Site] {
        match self.kind {
            ModelKind::Cp2 => &[Site::P1, Site::P2, Site::P3, Site::S1, Site::S2, Site::S3, Site::Free],
            ModelKind::S4 => &[Site::Q1, Site::Q2, Site::T1, Site::T2, Site::Free],
        }
    }

    pub fn point_labels(&self) -> &'static [Site] {
        match self.kind {
            ModelKind::Cp2 => &[Site::P1, Site::P2, Site::P3],
            ModelKind::S4 => &[Site::Q1, Site::Q2],
        }
    }

    pub fn sphere_labels(&self) -> &'static [Site] {
        match self.kind {
            ModelKind::Cp2 => &[Site::S1, Site::S2, Site::S3],
            ModelKind::S4 => &[Site::T1, Site::T2],
        }
    }

    /// Rotation numbers at a fixed point of the model.
    pub fn rotation_at(&self, site: Site) -> Option<Rotation> {
        let m = self.modulus();
        let (a, b) = (self.rot.a() as i64, self.rot.b() as i64);
        let pair = match (self.kind, site) {
            (ModelKind::Cp2, Site::P1) => (a, b),
            (ModelKind::Cp2, Site::P2) => (-a, b - a),
            (ModelKind::Cp2, Site::P3) => (-b, a - b),
            (ModelKind::S4, Site::Q1) => (a, b),
            (ModelKind::S4, Site::Q2) => (a, -b),
            _ => return None,
        };
        Some(Rotation::new(pair.0, pair.1, m))
    }

    pub fn fixed_points(&self) -> Vec<FixedPointRecord> {
        self.point_labels()
            .iter()
            .map(|&label| FixedPointRecord { label, rotation: self.rotation_at(label).unwrap() })
            .collect()
    }

    pub fn sphere(&self, site: Site) -> Option<SphereRecord> {
        let m = self.modulus();
        let (a, b) = (self.rot.a(), self.rot.b());
        let order = |x: u64| x.gcd(&m.get());
        let (order, normal, poles) = match (self.kind, site) {
            (ModelKind::Cp2, Site::S1) => (order(m.reduce(a as i64 - b as i64)), a, [Site::P2, Site::P3]),
            (ModelKind::Cp2, Site::S2) => (order(b), a, [Site::P1, Site::P3]),
            (ModelKind::Cp2, Site::S3) => (order(a), b, [Site::P1, Site::P2]),
            (ModelKind::S4, Site::T1) => (order(a), b, [Site::Q1, Site::Q2]),
            (ModelKind::S4, Site::T2) => (order(b), a, [Site::Q1, Site::Q2]),
            _ => return None,
        };
        let sub = Modulus::new(order).expect("divisor of an odd modulus");
        Some(SphereRecord { label: site, order, normal: sub.unsigned(normal % order), poles })
    }

    /// Every invariant sphere, singular or not.
    pub fn spheres(&self) -> Vec<SphereRecord> {
        self.sphere_labels().iter().map(|&s| self.sphere(s).unwrap()).collect()
    }

    /// Fixed points with their rotations and the spheres with non-trivial
    /// pointwise isotropy.
    pub fn fixed_data(&self) -> (Vec<FixedPointRecord>, Vec<SphereRecord>) {
        let spheres = self.spheres().into_iter().filter(SphereRecord::is_singular).collect();
        (self.fixed_points(), spheres)
    }

    /// Components of the fixed set of the subgroup of order `d > 1`.
    pub fn fix_structure(&self, d: u64) -> Result<FixStructure, ModelError> {
        self.modulus().subgroup(d)?;
        if d == 1 {
            return Err(ModelError::TrivialSubgroup);
        }
        let fixed_sphere = self.spheres().into_iter().find(|s| s.order % d == 0);
        Ok(match fixed_sphere {
            Some(sphere) => {
                let points = self
                    .fixed_points()
                    .into_iter()
                    .filter(|p| !sphere.poles.contains(&p.label))
                    .collect();
                FixStructure { points, spheres: vec![sphere] }
            }
            None => FixStructure { points: self.fixed_points(), spheres: Vec::new() },
        })
    }

    /// The component of `Fix(model, C_d)` that contains `site`, named by
    /// its label: a point names itself when isolated, otherwise the sphere
    /// through it. `None` when the site is not fixed by `C_d`.
    pub fn component_of(&self, site: Site, d: u64) -> Option<Site> {
        let fix = self.fix_structure(d).ok()?;
        match site.kind() {
            SiteKind::Point => {
                if !site.belongs_to(self.kind) {
                    return None;
                }
                match fix.spheres.first() {
                    Some(s) if s.poles.contains(&site) => Some(s.label),
                    _ => Some(site),
                }
            }
            SiteKind::Sphere => fix.spheres.iter().find(|s| s.label == site).map(|s| s.label),
            SiteKind::Free => None,
        }
    }

    /// Exact isotropy order of a generic point of the site: the full order
    /// at fixed points, the sphere order on a sphere, `1` in the free part.
    pub fn site_isotropy(&self, site: Site) -> Option<u64> {
        if !site.belongs_to(self.kind) {
            return None;
        }
        match site.kind() {
            SiteKind::Point => Some(self.order()),
            SiteKind::Sphere => self.sphere(site).map(|s| s.order),
            SiteKind::Free => Some(1),
        }
    }

    /// Fixed points at the full order and each singular sphere interior at
    /// its own order.
    pub fn exact_isotropy_components(&self) -> Vec<(Site, u64)> {
        let mut out: Vec<(Site, u64)> =
            self.point_labels().iter().map(|&p| (p, self.order())).collect();
        out.extend(self.spheres().into_iter().filter(SphereRecord::is_singular).map(|s| (s.label, s.order)));
        out
    }

    /// Number of distinct isotropy orders occurring on the model.
    pub fn orbit_type_count(&self) -> usize {
        let mut orders: Vec<u64> = vec![self.order()];
        orders.extend(self.spheres().iter().filter(|s| s.is_singular()).map(|s| s.order));
        // generic points of an effective action have trivial isotropy
        orders.push(1);
        orders.sort_unstable();
        orders.dedup();
        orders.len()
    }

    pub fn relabel(&self, g: &Relabeling) -> LinearModel {
        LinearModel { kind: self.kind, rot: g.apply(self.rot) }
    }

    /// The least representative of the model's class under relabeling,
    /// together with every relabeling that reaches it.
    pub fn canonical_frames(&self) -> (Rotation, Vec<Relabeling>) {
        let all = Relabeling::all(self.kind);
        let best = all.iter().map(|g| g.apply(self.rot)).min().expect("group is non-empty");
        let frames = all.into_iter().filter(|g| g.apply(self.rot) == best).collect();
        (best, frames)
    }

    /// Relabelings that fix this representative.
    pub fn automorphisms(&self) -> Vec<Relabeling> {
        Relabeling::all(self.kind).into_iter().filter(|g| g.apply(self.rot) == self.rot).collect()
    }
}

impl fmt::Display for LinearModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{};{})", self.kind, self.rot.a(), self.rot.b(), self.order())
    }
}
