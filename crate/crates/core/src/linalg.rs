//! Dense linear algebra over F_l: incremental echelon forms (rank tracking
//! and left solves) and exact integer determinants of 0/1 matrices.
//!
//! Two residue backends: `SmallField` for l < 2^32 (plain u64 residues) and
//! `MontField<N>` for wider primes (N-limb Montgomery form). `ModL` picks one
//! at runtime from the size of l.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{is_prime_u64, pow_mod_u64};
use crate::error::{Error, Result};

pub trait PrimeField: Clone + Send + Sync {
    type Elem: Copy + Eq + Debug + Send + Sync;

    fn modulus(&self) -> BigUint;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: Self::Elem) -> bool;
    fn from_biguint(&self, a: &BigUint) -> Self::Elem;
    fn to_biguint(&self, a: Self::Elem) -> BigUint;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn inv(&self, a: Self::Elem) -> Self::Elem;

    fn neg(&self, a: Self::Elem) -> Self::Elem {
        self.sub(self.zero(), a)
    }

    fn from_i64(&self, a: i64) -> Self::Elem {
        let v = self.from_biguint(&BigUint::from(a.unsigned_abs()));
        if a < 0 {
            self.neg(v)
        } else {
            v
        }
    }

    /// a - c*b
    fn sub_mul(&self, a: Self::Elem, c: Self::Elem, b: Self::Elem) -> Self::Elem {
        self.sub(a, self.mul(c, b))
    }
}

#[derive(Clone, Debug)]
pub struct SmallField {
    p: u64,
}

impl SmallField {
    pub fn new(p: u64) -> Self {
        assert!(p < 1 << 32 && p >= 2);
        SmallField { p }
    }
}

impl PrimeField for SmallField {
    type Elem = u64;

    fn modulus(&self) -> BigUint {
        BigUint::from(self.p)
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: u64) -> bool {
        a == 0
    }
    fn from_biguint(&self, a: &BigUint) -> u64 {
        (a % self.p).to_u64().unwrap()
    }
    fn to_biguint(&self, a: u64) -> BigUint {
        BigUint::from(a)
    }
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }
    fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero");
        pow_mod_u64(a, self.p - 2, self.p)
    }
    fn sub_mul(&self, a: u64, c: u64, b: u64) -> u64 {
        // a + (p - c*b mod p) < 2p < 2^33
        (a + self.p - c * b % self.p) % self.p
    }
}

/// Montgomery arithmetic with N 64-bit limbs; the modulus must be odd and
/// below 2^(64N - 1) so that sums never overflow.
#[derive(Clone, Debug)]
pub struct MontField<const N: usize> {
    n: [u64; N],
    n0inv: u64,
    r2: [u64; N],
    one: [u64; N],
    modulus: BigUint,
}

fn to_limbs<const N: usize>(x: &BigUint) -> [u64; N] {
    let mut out = [0u64; N];
    for (o, d) in out.iter_mut().zip(x.iter_u64_digits()) {
        *o = d;
    }
    out
}

fn from_limbs(x: &[u64]) -> BigUint {
    let mut bytes = Vec::with_capacity(x.len() * 8);
    for d in x {
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    BigUint::from_bytes_le(&bytes)
}

impl<const N: usize> MontField<N> {
    pub fn new(modulus: &BigUint) -> Self {
        assert!(modulus.is_odd(), "Montgomery modulus must be odd");
        assert!(modulus.bits() < 64 * N as u64, "modulus too wide for {N} limbs");
        let n: [u64; N] = to_limbs(modulus);
        // -n^{-1} mod 2^64 by Newton iteration
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(n[0].wrapping_mul(inv)));
        }
        let n0inv = inv.wrapping_neg();
        let r = BigUint::one() << (64 * N);
        let r2 = to_limbs(&((&r * &r) % modulus));
        let one = to_limbs(&(&r % modulus));
        MontField {
            n,
            n0inv,
            r2,
            one,
            modulus: modulus.clone(),
        }
    }

    #[inline]
    fn geq(&self, a: &[u64; N]) -> bool {
        for i in (0..N).rev() {
            if a[i] != self.n[i] {
                return a[i] > self.n[i];
            }
        }
        true
    }

    #[inline]
    fn sub_n(&self, a: &mut [u64; N]) {
        let mut borrow = 0u64;
        for i in 0..N {
            let (d1, b1) = a[i].overflowing_sub(self.n[i]);
            let (d2, b2) = d1.overflowing_sub(borrow);
            a[i] = d2;
            borrow = (b1 | b2) as u64;
        }
    }

    #[inline]
    fn mont_mul(&self, a: &[u64; N], b: &[u64; N]) -> [u64; N] {
        // CIOS; t has N + 2 words but the top word stays below 2
        let mut t = [0u64; 8];
        debug_assert!(N + 2 <= 8);
        for i in 0..N {
            let mut c: u128 = 0;
            for j in 0..N {
                let s = t[j] as u128 + (a[j] as u128) * (b[i] as u128) + c;
                t[j] = s as u64;
                c = s >> 64;
            }
            let s = t[N] as u128 + c;
            t[N] = s as u64;
            t[N + 1] = (s >> 64) as u64;
            let m = t[0].wrapping_mul(self.n0inv);
            let s = t[0] as u128 + (m as u128) * (self.n[0] as u128);
            let mut c = s >> 64;
            for j in 1..N {
                let s = t[j] as u128 + (m as u128) * (self.n[j] as u128) + c;
                t[j - 1] = s as u64;
                c = s >> 64;
            }
            let s = t[N] as u128 + c;
            t[N - 1] = s as u64;
            t[N] = t[N + 1] + (s >> 64) as u64;
        }
        let mut out = [0u64; N];
        out.copy_from_slice(&t[..N]);
        if t[N] != 0 || self.geq(&out) {
            self.sub_n(&mut out);
        }
        out
    }
}

impl<const N: usize> PrimeField for MontField<N> {
    type Elem = [u64; N];

    fn modulus(&self) -> BigUint {
        self.modulus.clone()
    }
    fn zero(&self) -> [u64; N] {
        [0; N]
    }
    fn one(&self) -> [u64; N] {
        self.one
    }
    fn is_zero(&self, a: [u64; N]) -> bool {
        a.iter().all(|&x| x == 0)
    }
    fn from_biguint(&self, a: &BigUint) -> [u64; N] {
        let x = to_limbs(&(a % &self.modulus));
        self.mont_mul(&x, &self.r2)
    }
    fn to_biguint(&self, a: [u64; N]) -> BigUint {
        let mut one = [0u64; N];
        one[0] = 1;
        from_limbs(&self.mont_mul(&a, &one))
    }
    fn add(&self, a: [u64; N], b: [u64; N]) -> [u64; N] {
        let mut out = [0u64; N];
        let mut carry = 0u64;
        for i in 0..N {
            let (s1, c1) = a[i].overflowing_add(b[i]);
            let (s2, c2) = s1.overflowing_add(carry);
            out[i] = s2;
            carry = (c1 | c2) as u64;
        }
        if self.geq(&out) {
            self.sub_n(&mut out);
        }
        out
    }
    fn sub(&self, a: [u64; N], b: [u64; N]) -> [u64; N] {
        let mut out = [0u64; N];
        let mut borrow = 0u64;
        for i in 0..N {
            let (d1, b1) = a[i].overflowing_sub(b[i]);
            let (d2, b2) = d1.overflowing_sub(borrow);
            out[i] = d2;
            borrow = (b1 | b2) as u64;
        }
        if borrow != 0 {
            let mut carry = 0u64;
            for i in 0..N {
                let (s1, c1) = out[i].overflowing_add(self.n[i]);
                let (s2, c2) = s1.overflowing_add(carry);
                out[i] = s2;
                carry = (c1 | c2) as u64;
            }
        }
        out
    }
    fn mul(&self, a: [u64; N], b: [u64; N]) -> [u64; N] {
        self.mont_mul(&a, &b)
    }
    fn inv(&self, a: [u64; N]) -> [u64; N] {
        assert!(!self.is_zero(a), "inverse of zero");
        let e = &self.modulus - 2u32;
        let mut acc = self.one;
        for i in (0..e.bits()).rev() {
            acc = self.mont_mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mont_mul(&acc, &a);
            }
        }
        acc
    }
}

/// A sparse row with small integer coefficients, as produced by relations.
pub type SparseRow = Vec<(usize, i64)>;

/// Incrementally built row echelon form. Each stored row is reduced against
/// the pivots of all earlier rows. With tracking enabled every stored row
/// also carries its expression as a combination of the inserted rows, which
/// is what `solve_left` needs.
pub struct Echelon<F: PrimeField> {
    field: F,
    ncols: usize,
    rows: Vec<Vec<F::Elem>>,
    pivots: Vec<usize>,
    pivot_of_col: Vec<Option<usize>>,
    combos: Option<Vec<Vec<F::Elem>>>,
    inserted: usize,
}

impl<F: PrimeField> Echelon<F> {
    pub fn new(field: F, ncols: usize, tracking: bool) -> Self {
        Echelon {
            field,
            ncols,
            rows: Vec::new(),
            pivots: Vec::new(),
            pivot_of_col: vec![None; ncols],
            combos: tracking.then(Vec::new),
            inserted: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    /// Inserts a row; returns true if the rank grew.
    pub fn insert(&mut self, row: &[F::Elem]) -> bool {
        assert_eq!(row.len(), self.ncols);
        let f = &self.field;
        let index = self.inserted;
        self.inserted += 1;
        let mut v = row.to_vec();
        let mut combo = self.combos.as_ref().map(|_| {
            let mut c = vec![f.zero(); index + 1];
            c[index] = f.one();
            c
        });
        for (k, &pc) in self.pivots.iter().enumerate() {
            let c = v[pc];
            if f.is_zero(c) {
                continue;
            }
            // stored rows are normalized to pivot 1
            let r = &self.rows[k];
            for j in pc..self.ncols {
                v[j] = f.sub_mul(v[j], c, r[j]);
            }
            if let (Some(combo), Some(combos)) = (combo.as_mut(), self.combos.as_ref()) {
                let ck = &combos[k];
                for (j, &x) in ck.iter().enumerate() {
                    combo[j] = f.sub_mul(combo[j], c, x);
                }
            }
        }
        let Some(pc) = v.iter().position(|&x| !f.is_zero(x)) else {
            return false;
        };
        let inv = f.inv(v[pc]);
        for x in v.iter_mut().skip(pc) {
            *x = f.mul(*x, inv);
        }
        if let (Some(mut combo), Some(combos)) = (combo, self.combos.as_mut()) {
            for x in combo.iter_mut() {
                *x = f.mul(*x, inv);
            }
            combos.push(combo);
        }
        self.pivot_of_col[pc] = Some(self.rows.len());
        self.pivots.push(pc);
        self.rows.push(v);
        true
    }

    pub fn insert_sparse(&mut self, row: &[(usize, i64)]) -> bool {
        let dense = densify(&self.field, row, self.ncols);
        self.insert(&dense)
    }

    /// x with x * (inserted rows) = target, if target lies in the span.
    /// Requires tracking.
    pub fn express(&self, target: &[F::Elem]) -> Option<Vec<F::Elem>> {
        let combos = self.combos.as_ref().expect("echelon built without tracking");
        let f = &self.field;
        let mut t = target.to_vec();
        let mut x = vec![f.zero(); self.inserted];
        for (k, &pc) in self.pivots.iter().enumerate() {
            let c = t[pc];
            if f.is_zero(c) {
                continue;
            }
            let r = &self.rows[k];
            for j in pc..self.ncols {
                t[j] = f.sub_mul(t[j], c, r[j]);
            }
            for (j, &y) in combos[k].iter().enumerate() {
                x[j] = f.add(x[j], f.mul(c, y));
            }
        }
        t.iter().all(|&y| f.is_zero(y)).then_some(x)
    }
}

fn densify<F: PrimeField>(f: &F, row: &[(usize, i64)], ncols: usize) -> Vec<F::Elem> {
    let mut v = vec![f.zero(); ncols];
    for &(j, c) in row {
        v[j] = f.add(v[j], f.from_i64(c));
    }
    v
}

/// Runtime choice of backend by the width of l.
#[derive(Clone, Debug)]
pub enum ModL {
    Small(SmallField),
    Mont1(MontField<1>),
    Mont2(MontField<2>),
    Mont3(MontField<3>),
    Mont4(MontField<4>),
}

macro_rules! dispatch {
    ($self:expr, $f:ident => $body:expr) => {
        match $self {
            ModL::Small($f) => $body,
            ModL::Mont1($f) => $body,
            ModL::Mont2($f) => $body,
            ModL::Mont3($f) => $body,
            ModL::Mont4($f) => $body,
        }
    };
}

impl ModL {
    pub fn new(ell: &BigUint) -> Result<Self> {
        if ell < &BigUint::from(2u32) {
            return Err(Error::BadModulus(ell.clone()));
        }
        if let Some(small) = ell.to_u64().filter(|&x| x < 1 << 32) {
            return Ok(ModL::Small(SmallField::new(small)));
        }
        if ell.is_even() {
            return Err(Error::BadModulus(ell.clone()));
        }
        Ok(match ell.bits() {
            0..=62 => ModL::Mont1(MontField::new(ell)),
            63..=126 => ModL::Mont2(MontField::new(ell)),
            127..=190 => ModL::Mont3(MontField::new(ell)),
            191..=254 => ModL::Mont4(MontField::new(ell)),
            _ => return Err(Error::BadModulus(ell.clone())),
        })
    }

    pub fn modulus(&self) -> BigUint {
        dispatch!(self, f => f.modulus())
    }

    pub fn backend_name(&self) -> &'static str {
        match self {
            ModL::Small(_) => "u64",
            ModL::Mont1(_) => "montgomery-1",
            ModL::Mont2(_) => "montgomery-2",
            ModL::Mont3(_) => "montgomery-3",
            ModL::Mont4(_) => "montgomery-4",
        }
    }
}

/// Backend-erased incremental echelon form over sparse integer rows.
pub enum AnyEchelon {
    Small(Echelon<SmallField>),
    Mont1(Echelon<MontField<1>>),
    Mont2(Echelon<MontField<2>>),
    Mont3(Echelon<MontField<3>>),
    Mont4(Echelon<MontField<4>>),
}

macro_rules! dispatch_ech {
    ($self:expr, $e:ident => $body:expr) => {
        match $self {
            AnyEchelon::Small($e) => $body,
            AnyEchelon::Mont1($e) => $body,
            AnyEchelon::Mont2($e) => $body,
            AnyEchelon::Mont3($e) => $body,
            AnyEchelon::Mont4($e) => $body,
        }
    };
}

impl AnyEchelon {
    pub fn new(field: &ModL, ncols: usize, tracking: bool) -> Self {
        match field {
            ModL::Small(f) => AnyEchelon::Small(Echelon::new(f.clone(), ncols, tracking)),
            ModL::Mont1(f) => AnyEchelon::Mont1(Echelon::new(f.clone(), ncols, tracking)),
            ModL::Mont2(f) => AnyEchelon::Mont2(Echelon::new(f.clone(), ncols, tracking)),
            ModL::Mont3(f) => AnyEchelon::Mont3(Echelon::new(f.clone(), ncols, tracking)),
            ModL::Mont4(f) => AnyEchelon::Mont4(Echelon::new(f.clone(), ncols, tracking)),
        }
    }

    pub fn insert_sparse(&mut self, row: &[(usize, i64)]) -> bool {
        dispatch_ech!(self, e => e.insert_sparse(row))
    }

    pub fn rank(&self) -> usize {
        dispatch_ech!(self, e => e.rank())
    }

    pub fn ncols(&self) -> usize {
        dispatch_ech!(self, e => e.ncols())
    }

    pub fn inserted(&self) -> usize {
        dispatch_ech!(self, e => e.inserted())
    }

    /// Coefficients x (one per inserted row) with x * rows = e_j.
    pub fn express_unit(&self, j: usize) -> Option<Vec<BigUint>> {
        dispatch_ech!(self, e => {
            let f = e.field();
            let mut t = vec![f.zero(); e.ncols()];
            t[j] = f.one();
            e.express(&t).map(|x| x.into_iter().map(|y| f.to_biguint(y)).collect())
        })
    }
}

/// Rank of a dense integer matrix modulo l.
pub fn rank_mod(rows: &[Vec<i64>], ell: &BigUint) -> Result<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let field = ModL::new(ell)?;
    let mut e = AnyEchelon::new(&field, ncols, false);
    for r in rows {
        let sparse: SparseRow = r
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| (j, c))
            .collect();
        e.insert_sparse(&sparse);
    }
    Ok(e.rank())
}

/// x * M = target (mod l), with M given by sparse integer rows.
fn check_left(rows: &[SparseRow], x: &[BigUint], target: &[BigUint], ell: &BigUint) -> bool {
    let mut acc = vec![BigUint::zero(); target.len()];
    for (r, xi) in rows.iter().zip(x) {
        if xi.is_zero() {
            continue;
        }
        for &(j, c) in r {
            let c = BigInt::from(c).mod_floor(&BigInt::from(ell.clone()));
            acc[j] = (&acc[j] + xi * c.to_biguint().unwrap()) % ell;
        }
    }
    acc.iter().zip(target).all(|(a, t)| a == &(t % ell))
}

/// Any x with x * M = e_j over F_l; the solution is verified by
/// multiplication before it is returned.
pub fn solve_left(rows: &[SparseRow], ncols: usize, j: usize, ell: &BigUint) -> Result<Vec<BigUint>> {
    let field = ModL::new(ell)?;
    let mut e = AnyEchelon::new(&field, ncols, true);
    for r in rows {
        e.insert_sparse(r);
    }
    let x = e.express_unit(j).ok_or(Error::NotInRowSpan)?;
    verify_left(rows, &x, ncols, j, ell)?;
    Ok(x)
}

pub fn verify_left(
    rows: &[SparseRow],
    x: &[BigUint],
    ncols: usize,
    j: usize,
    ell: &BigUint,
) -> Result<()> {
    let mut target = vec![BigUint::zero(); ncols];
    target[j] = BigUint::one();
    if x.len() != rows.len() || !check_left(rows, x, &target, ell) {
        return Err(Error::VerificationFailed(format!(
            "left solve for unit vector e_{j} does not multiply back"
        )));
    }
    Ok(())
}

/// Inhomogeneous system A x = b over F_l built row by row. The right-hand
/// side rides along as an extra column, so a pivot there means the rows are
/// inconsistent.
pub struct AugmentedSystem {
    field: ModL,
    ncols: usize,
    echelon: AnyEchelon,
    rows: Vec<SparseRow>,
    rhs: Vec<BigUint>,
    inconsistent: bool,
}

impl AugmentedSystem {
    pub fn new(field: &ModL, ncols: usize) -> Self {
        AugmentedSystem {
            field: field.clone(),
            ncols,
            echelon: AnyEchelon::new(field, ncols + 1, false),
            rows: Vec::new(),
            rhs: Vec::new(),
            inconsistent: false,
        }
    }

    /// Adds a row; returns true if the rank of A grew.
    pub fn insert(&mut self, row: SparseRow, rhs: BigUint) -> bool {
        let grew = dispatch_ech!(&mut self.echelon, e => {
            let f = e.field().clone();
            let mut dense = densify(&f, &row, self.ncols + 1);
            dense[self.ncols] = f.from_biguint(&rhs);
            let before = e.rank();
            e.insert(&dense);
            if e.rank() > before && *e.pivots.last().unwrap() == self.ncols {
                self.inconsistent = true;
                false
            } else {
                e.rank() > before
            }
        });
        self.rows.push(row);
        self.rhs.push(rhs);
        grew
    }

    pub fn rank(&self) -> usize {
        dispatch_ech!(&self.echelon, e => e.pivots.iter().filter(|&&c| c < self.ncols).count())
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// The unique solution, verified against every inserted row.
    pub fn solve(&self) -> Result<Vec<BigUint>> {
        if self.inconsistent {
            return Err(Error::VerificationFailed("inconsistent linear system".to_string()));
        }
        if self.rank() < self.ncols {
            return Err(Error::BaseSystemRankDeficient {
                rank: self.rank(),
                unknowns: self.ncols,
                rows: self.rows.len(),
            });
        }
        let ncols = self.ncols;
        let sol: Vec<BigUint> = dispatch_ech!(&self.echelon, e => {
            let f = e.field();
            let mut x = vec![f.zero(); ncols];
            let mut order: Vec<usize> = (0..e.rank()).collect();
            order.sort_by_key(|&k| std::cmp::Reverse(e.pivots[k]));
            for k in order {
                let pc = e.pivots[k];
                let r = &e.rows[k];
                let mut v = r[ncols];
                for j in pc + 1..ncols {
                    v = f.sub_mul(v, r[j], x[j]);
                }
                x[pc] = v;
            }
            x.into_iter().map(|y| f.to_biguint(y)).collect()
        });
        let ell = self.field.modulus();
        let ell_i = BigInt::from(ell.clone());
        for (r, b) in self.rows.iter().zip(&self.rhs) {
            let mut acc = BigInt::zero();
            for &(j, c) in r {
                acc += BigInt::from(c) * BigInt::from(sol[j].clone());
            }
            if acc.mod_floor(&ell_i).to_biguint().unwrap() != b % &ell {
                return Err(Error::VerificationFailed(
                    "linear system solution does not multiply back".to_string(),
                ));
            }
        }
        Ok(sol)
    }
}

/// Solves A x = b over F_l for a system with a unique solution.
pub fn solve_unique(
    rows: &[SparseRow],
    rhs: &[BigUint],
    ncols: usize,
    ell: &BigUint,
) -> Result<Vec<BigUint>> {
    let mut sys = AugmentedSystem::new(&ModL::new(ell)?, ncols);
    for (r, b) in rows.iter().zip(rhs) {
        sys.insert(r.clone(), b.clone());
    }
    sys.solve()
}

/// Determinant modulo a word-size prime.
pub fn det_mod_p(m: &[Vec<u8>], p: u64) -> u64 {
    let n = m.len();
    let f = SmallField::new(p);
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as u64 % p).collect())
        .collect();
    let mut det = 1u64;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if piv != col {
            a.swap(piv, col);
            det = f.neg(det);
        }
        det = f.mul(det, a[col][col]);
        let inv = f.inv(a[col][col]);
        let (top, bottom) = a.split_at_mut(col + 1);
        let prow = &top[col];
        for row in bottom.iter_mut() {
            let c = row[col];
            if c == 0 {
                continue;
            }
            let c = f.mul(c, inv);
            for j in col..n {
                row[j] = f.sub_mul(row[j], c, prow[j]);
            }
        }
    }
    det
}

/// Largest `count` primes below 2^31, descending.
pub fn crt_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = (1u64 << 31) - 1;
    while out.len() < count {
        if is_prime_u64(c) {
            out.push(c);
        }
        c -= 2;
    }
    out
}

/// Square of the Hadamard bound: the product of squared row norms.
pub fn hadamard_bound_sq(m: &[Vec<u8>]) -> BigUint {
    m.iter()
        .map(|r| BigUint::from(r.iter().map(|&x| (x as u64) * (x as u64)).sum::<u64>()))
        .product()
}

/// Exact determinant of a square 0/1 (or small nonnegative) matrix by
/// determinants modulo word-size primes and symmetric CRT reconstruction.
pub fn det_exact(m: &[Vec<u8>]) -> BigInt {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "matrix must be square");
    if n == 0 {
        return BigInt::one();
    }
    let bound_sq = hadamard_bound_sq(m);
    if bound_sq.is_zero() {
        return BigInt::zero();
    }
    // need prod(primes) > 2 * bound, i.e. prod^2 > 4 * bound^2
    let need = bound_sq * 4u32;
    let mut count = 59;
    let primes = loop {
        let ps = crt_primes(count);
        let prod: BigUint = ps.iter().map(|&p| BigUint::from(p)).product();
        if &prod * &prod > need {
            break ps;
        }
        count *= 2;
    };
    let mut used = Vec::new();
    let mut prod = BigUint::one();
    for &p in &primes {
        used.push(p);
        prod *= p;
        if &prod * &prod > need {
            break;
        }
    }
    let residues = det_residues(m, &used);
    let pairs: Vec<(BigUint, BigUint)> = residues
        .into_iter()
        .zip(&used)
        .map(|(r, &p)| (BigUint::from(r), BigUint::from(p)))
        .collect();
    let x = crate::arith::crt(&pairs) % &prod;
    let half = &prod >> 1;
    if x > half {
        BigInt::from_biguint(Sign::Minus, &prod - x)
    } else {
        BigInt::from_biguint(Sign::Plus, x)
    }
}

#[cfg(feature = "parallel")]
fn det_residues(m: &[Vec<u8>], primes: &[u64]) -> Vec<u64> {
    use rayon::prelude::*;
    primes.par_iter().map(|&p| det_mod_p(m, p)).collect()
}

#[cfg(not(feature = "parallel"))]
fn det_residues(m: &[Vec<u8>], primes: &[u64]) -> Vec<u64> {
    primes.iter().map(|&p| det_mod_p(m, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_field<F: PrimeField>(f: &F, rng: &mut ChaCha8Rng) {
        let ell = f.modulus();
        for _ in 0..200 {
            let a = rng.gen_biguint_below(&ell);
            let b = rng.gen_biguint_below(&ell);
            let (ea, eb) = (f.from_biguint(&a), f.from_biguint(&b));
            assert_eq!(f.to_biguint(f.mul(ea, eb)), (&a * &b) % &ell);
            assert_eq!(f.to_biguint(f.add(ea, eb)), (&a + &b) % &ell);
            assert_eq!(f.to_biguint(f.sub(ea, eb)), (&a + &ell - &b) % &ell);
            if !a.is_zero() {
                assert_eq!(f.mul(ea, f.inv(ea)), f.one());
            }
        }
        assert_eq!(f.to_biguint(f.from_i64(-1)), &ell - 1u32);
    }

    use num_bigint::RandBigInt;

    #[test]
    fn backends_match_bigint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        check_field(&SmallField::new(101), &mut rng);
        check_field(&SmallField::new(4294967291), &mut rng);
        let p61 = BigUint::from((1u64 << 61) - 1);
        check_field(&MontField::<1>::new(&p61), &mut rng);
        let p127 = (BigUint::one() << 127) - 1u32;
        check_field(&MontField::<2>::new(&p127), &mut rng);
        check_field(&MontField::<3>::new(&p127), &mut rng);
        let p255 = (BigUint::one() << 255) - 19u32;
        check_field(&MontField::<4>::new(&p255), &mut rng);
    }

    #[test]
    fn rank_examples() {
        let ell = BigUint::from(101u32);
        let id: Vec<Vec<i64>> = (0..5)
            .map(|i| (0..5).map(|j| (i == j) as i64).collect())
            .collect();
        assert_eq!(rank_mod(&id, &ell).unwrap(), 5);
        let rep = vec![vec![1, 2, 3], vec![1, 2, 3]];
        assert_eq!(rank_mod(&rep, &ell).unwrap(), 1);
        // dependent only modulo 3
        let m = vec![vec![1, 1], vec![1, 4]];
        assert_eq!(rank_mod(&m, &BigUint::from(3u32)).unwrap(), 1);
        assert_eq!(rank_mod(&m, &ell).unwrap(), 2);
    }

    #[test]
    fn solve_left_examples() {
        let ell = BigUint::from(7u32);
        let id: Vec<SparseRow> = (0..4).map(|i| vec![(i, 1)]).collect();
        let x = solve_left(&id, 4, 2, &ell).unwrap();
        assert_eq!(x, vec![0u32, 0, 1, 0].into_iter().map(BigUint::from).collect::<Vec<_>>());
        let dup: Vec<SparseRow> = vec![vec![(0, 1)], vec![(0, 1)], vec![(1, 2)]];
        assert!(solve_left(&dup, 2, 1, &ell).is_ok());
        let short: Vec<SparseRow> = vec![vec![(0, 1), (1, 1)]];
        assert!(matches!(solve_left(&short, 2, 0, &ell), Err(Error::NotInRowSpan)));
    }

    #[test]
    fn solve_unique_round_trip() {
        let ell = (BigUint::one() << 127) - 1u32;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 12;
        let x: Vec<BigUint> = (0..n).map(|_| rng.gen_biguint_below(&ell)).collect();
        let rows: Vec<SparseRow> = (0..n + 5)
            .map(|_| (0..n).map(|j| (j, rng.gen_range(-3..=3))).collect())
            .collect();
        let rhs: Vec<BigUint> = rows
            .iter()
            .map(|r| {
                let mut acc = BigInt::zero();
                for &(j, c) in r {
                    acc += BigInt::from(c) * BigInt::from(x[j].clone());
                }
                acc.mod_floor(&BigInt::from(ell.clone())).to_biguint().unwrap()
            })
            .collect();
        assert_eq!(solve_unique(&rows, &rhs, n, &ell).unwrap(), x);
        assert!(matches!(
            solve_unique(&rows[..n - 2], &rhs[..n - 2], n, &ell),
            Err(Error::BaseSystemRankDeficient { .. })
        ));
    }

    #[test]
    fn det_examples() {
        let id: Vec<Vec<u8>> = (0..6).map(|i| (0..6).map(|j| (i == j) as u8).collect()).collect();
        assert_eq!(det_exact(&id), BigInt::one());
        let mut two = id.clone();
        two[3] = two[1].clone();
        assert_eq!(det_exact(&two), BigInt::zero());
        let swap = vec![vec![0u8, 1], vec![1, 0]];
        assert_eq!(det_exact(&swap), BigInt::from(-1));
    }

    #[test]
    fn crt_prime_list() {
        let ps = crt_primes(59);
        assert_eq!(ps[0], 2147483647);
        assert!(ps.windows(2).all(|w| w[0] > w[1]));
    }
}
