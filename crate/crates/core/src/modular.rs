//! Residue arithmetic for cyclic groups of odd order.
//!
//! Subgroups of `C_m` are identified with the divisors of `m`. Rotation data
//! at a fixed point is a pair of residues modulo the order of the group that
//! fixes it; [`Rotation`] keeps the ordered pair as written, [`Weight`] is the
//! class of that pair under `(a,b) ~ (b,a) ~ (-a,-b)`.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest admissible group order. Keeps every intermediate of residue
/// arithmetic inside `i128` with room to spare.
pub const MAX_MODULUS: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("modulus {0} is even; only odd-order groups are supported")]
    EvenModulus(u64),
    #[error("modulus {0} exceeds the supported bound")]
    ModulusTooLarge(u64),
    #[error("gcd({a}, {b}, {m}) = {g}: the action is not effective")]
    GcdViolation { a: u64, b: u64, m: u64, g: u64 },
    #[error("weights live over different moduli ({0} vs {1})")]
    ModulusMismatch(u64, u64),
    #[error("{d} does not divide {m}")]
    NotADivisor { d: u64, m: u64 },
    #[error("matrix power overflows 64-bit entries (k = {0})")]
    Overflow(u64),
}

/// Order of a cyclic group of odd order. `1` is the trivial group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus(u64);

impl Modulus {
    pub const TRIVIAL: Modulus = Modulus(1);

    pub fn new(m: u64) -> Result<Self, ArithError> {
        if m == 0 {
            Err(ArithError::ZeroModulus)
        } else if m % 2 == 0 {
            Err(ArithError::EvenModulus(m))
        } else if m > MAX_MODULUS {
            Err(ArithError::ModulusTooLarge(m))
        } else {
            Ok(Modulus(m))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    pub fn divides(self, d: u64) -> bool {
        d != 0 && self.0 % d == 0
    }

    /// The modulus of the subgroup of order `d`.
    pub fn subgroup(self, d: u64) -> Result<Modulus, ArithError> {
        if !self.divides(d) {
            return Err(ArithError::NotADivisor { d, m: self.0 });
        }
        // a divisor of an odd number is odd
        Ok(Modulus(d))
    }

    /// All divisors, ascending.
    pub fn divisors(self) -> Vec<u64> {
        divisors(self.0)
    }

    /// Divisors `d > 1`, ascending: the non-trivial subgroups.
    pub fn nontrivial_divisors(self) -> Vec<u64> {
        divisors(self.0).into_iter().filter(|&d| d > 1).collect()
    }

    #[inline]
    pub fn reduce(self, x: i64) -> u64 {
        (x as i128).rem_euclid(self.0 as i128) as u64
    }

    #[inline]
    fn reduce_wide(self, x: i128) -> u64 {
        x.rem_euclid(self.0 as i128) as u64
    }

    #[inline]
    pub fn neg(self, x: u64) -> u64 {
        if x == 0 {
            0
        } else {
            self.0 - x
        }
    }

    /// `±r` collapsed to the representative in `[0, m/2]`.
    pub fn unsigned(self, r: u64) -> u64 {
        let r = r % self.0;
        r.min(self.neg(r))
    }
}

impl TryFrom<u64> for Modulus {
    type Error = ArithError;
    fn try_from(m: u64) -> Result<Self, ArithError> {
        Modulus::new(m)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.0
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Divisors of `n`, ascending. `divisors(0)` is empty.
pub fn divisors(n: u64) -> Vec<u64> {
    if n == 0 {
        return Vec::new();
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            small.push(i);
            if i * i != n {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn gcd3(a: u64, b: u64, c: u64) -> u64 {
    a.gcd(&b).gcd(&c)
}

/// An ordered pair of residues modulo `m`.
///
/// This is the representative a model is written in: site labels of a
/// linear model depend on it, so it is never silently canonicalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rotation {
    a: u64,
    b: u64,
    m: Modulus,
}

impl Rotation {
    pub fn new(a: i64, b: i64, m: Modulus) -> Self {
        Rotation { a: m.reduce(a), b: m.reduce(b), m }
    }

    pub(crate) fn from_residues(a: u64, b: u64, m: Modulus) -> Self {
        Rotation { a: a % m.get(), b: b % m.get(), m }
    }

    #[inline]
    pub fn a(&self) -> u64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> u64 {
        self.b
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.m
    }

    pub fn pair(&self) -> (u64, u64) {
        (self.a, self.b)
    }

    pub fn swap(self) -> Self {
        Rotation { a: self.b, b: self.a, m: self.m }
    }

    pub fn neg(self) -> Self {
        Rotation { a: self.m.neg(self.a), b: self.m.neg(self.b), m: self.m }
    }

    /// `(a, -b)`: the rotation seen through an orientation-reversing
    /// identification of tangent spaces.
    pub fn reversed(self) -> Self {
        Rotation { a: self.a, b: self.m.neg(self.b), m: self.m }
    }

    /// The identification orbit `{(a,b), (b,a), (-a,-b), (-b,-a)}`.
    pub fn orbit(self) -> [Rotation; 4] {
        [self, self.swap(), self.neg(), self.swap().neg()]
    }

    /// Lexicographic minimum of the orbit.
    pub fn canonical(self) -> Rotation {
        self.orbit().into_iter().min().expect("orbit is non-empty")
    }

    pub fn content(&self) -> u64 {
        gcd3(self.a, self.b, self.m.get())
    }

    pub fn is_effective(&self) -> bool {
        self.m.get() == 1 || self.content() == 1
    }

    /// Same modulus and same identification class. Effectiveness is not
    /// required.
    pub fn equivalent(&self, other: &Rotation) -> bool {
        self.m == other.m && self.canonical() == other.canonical()
    }

    /// Reduction to the subgroup of order `d`.
    pub fn reduce(self, d: u64) -> Result<Rotation, ArithError> {
        let sub = self.m.subgroup(d)?;
        Ok(Rotation::from_residues(self.a, self.b, sub))
    }

    /// Multiply the column vector `(a, b)` by `mat`.
    pub fn apply(self, mat: &WeightMatrix) -> Rotation {
        let [[p, q], [r, s]] = mat.entries;
        let (a, b) = (self.a as i128, self.b as i128);
        let x = p as i128 * a + q as i128 * b;
        let y = r as i128 * a + s as i128 * b;
        Rotation { a: self.m.reduce_wide(x), b: self.m.reduce_wide(y), m: self.m }
    }

    pub fn weight(self) -> Result<Weight, ArithError> {
        if !self.is_effective() {
            return Err(ArithError::GcdViolation {
                a: self.a,
                b: self.b,
                m: self.m.get(),
                g: self.content(),
            });
        }
        let c = self.canonical();
        Ok(Weight { a: c.a, b: c.b, m: c.m })
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{})", self.a, self.b, self.m)
    }
}

/// An effective pair of rotation numbers up to `(a,b) ~ (b,a) ~ (-a,-b)`,
/// stored as the lexicographically least member of its class with
/// residues in `[0, m)`. Over the trivial group every weight is `(0,0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight {
    a: u64,
    b: u64,
    m: Modulus,
}

impl Weight {
    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn modulus(&self) -> Modulus {
        self.m
    }

    /// The canonical representative as an ordered pair.
    pub fn rotation(&self) -> Rotation {
        Rotation { a: self.a, b: self.b, m: self.m }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{})", self.a, self.b, self.m)
    }
}

pub fn normalize_weight(a: i64, b: i64, m: Modulus) -> Result<Weight, ArithError> {
    Rotation::new(a, b, m).weight()
}

pub fn weight_equiv(w1: &Weight, w2: &Weight) -> Result<bool, ArithError> {
    if w1.m != w2.m {
        return Err(ArithError::ModulusMismatch(w1.m.get(), w2.m.get()));
    }
    Ok(w1 == w2)
}

/// Reduce a weight to the subgroup of order `d`.
pub fn reduce_weight(w: &Weight, d: u64) -> Result<Weight, ArithError> {
    w.rotation().reduce(d)?.weight()
}

/// 2x2 integer matrix acting on weights as column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeightMatrix {
    pub entries: [[i64; 2]; 2],
}

impl WeightMatrix {
    pub const IDENTITY: WeightMatrix = WeightMatrix { entries: [[1, 0], [0, 1]] };

    pub fn new(p: i64, q: i64, r: i64, s: i64) -> Self {
        WeightMatrix { entries: [[p, q], [r, s]] }
    }

    pub fn det(&self) -> i64 {
        let [[p, q], [r, s]] = self.entries;
        p * s - q * r
    }

    pub fn checked_mul(&self, rhs: &WeightMatrix) -> Option<WeightMatrix> {
        let a = self.entries;
        let b = rhs.entries;
        let mut out = [[0i64; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0]
                    .checked_mul(b[0][j])?
                    .checked_add(a[i][1].checked_mul(b[1][j])?)?;
            }
        }
        Some(WeightMatrix { entries: out })
    }
}

impl fmt::Display for WeightMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[p, q], [r, s]] = self.entries;
        write!(f, "[[{p},{q}],[{r},{s}]]")
    }
}

/// The three weight-propagation matrices, one per fixed point of `CP^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    K,
    L,
    R,
}

impl Generator {
    pub fn matrix(self) -> WeightMatrix {
        match self {
            Generator::K => WeightMatrix::new(1, 0, 0, -1),
            Generator::L => WeightMatrix::new(-1, 0, 1, -1),
            Generator::R => WeightMatrix::new(0, -1, -1, 1),
        }
    }
}

/// Fixed points of a linear `CP^2`, as seen by the weight matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PointSite {
    P1,
    P2,
    P3,
}

impl PointSite {
    pub fn generator(self) -> Generator {
        match self {
            PointSite::P1 => Generator::K,
            PointSite::P2 => Generator::L,
            PointSite::P3 => Generator::R,
        }
    }
}

/// Weight of a same-stabilizer child attached by its first fixed point to
/// the fixed point `site` of a parent written as `w`.
pub fn child_weight(w: Rotation, site: PointSite) -> Result<Weight, ArithError> {
    w.apply(&site.generator().matrix()).weight()
}

/// Fibonacci numbers with `f(-1) = 1`, `f(0) = 0`, `f(1) = 1`, returned as
/// `(f(k-1), f(k), f(k+1))`.
fn fibonacci_triple(k: u64) -> Option<(i64, i64, i64)> {
    let (mut prev, mut cur) = (1i64, 0i64);
    for _ in 0..k {
        let next = prev.checked_add(cur)?;
        prev = cur;
        cur = next;
    }
    Some((prev, cur, prev.checked_add(cur)?))
}

/// Closed form of `gen^k`.
pub fn matrix_power(gen: Generator, k: u64) -> Result<WeightMatrix, ArithError> {
    match gen {
        Generator::K => Ok(if k % 2 == 0 { WeightMatrix::IDENTITY } else { Generator::K.matrix() }),
        Generator::L => {
            let k = i64::try_from(k).map_err(|_| ArithError::Overflow(k))?;
            let s = if k % 2 == 0 { 1 } else { -1 };
            Ok(WeightMatrix::new(s, 0, -s * k, s))
        }
        Generator::R => {
            let (fp, f, fn_) = fibonacci_triple(k).ok_or(ArithError::Overflow(k))?;
            Ok(WeightMatrix::new(fp, -f, -f, fn_))
        }
    }
}
