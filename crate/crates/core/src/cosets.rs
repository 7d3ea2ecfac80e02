//! The projective line P^1(F_{q^2}), homographies, and one representative per
//! coset of PGL_2(F_{q^2}) / PGL_2(F_q), identified by its block
//! m^{-1} * P^1(F_q).
//!
//! Points are indexed by the packed encoding of mu in F_{q^2}; infinity is
//! index q^2. Blocks are the circles of the inversive plane of order q.

use std::collections::HashSet;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Fq2};
use crate::rng::SeedSplitter;

pub type ProjPoint = u32;

pub fn infinity(ctx: &FieldCtx) -> ProjPoint {
    ctx.size() as u32
}

/// (a, b; c, d) acting by x -> (a x + b) / (c x + d).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Homography {
    pub a: Fq2,
    pub b: Fq2,
    pub c: Fq2,
    pub d: Fq2,
}

impl Homography {
    pub fn identity() -> Self {
        Homography {
            a: Fq2::ONE,
            b: Fq2::ZERO,
            c: Fq2::ZERO,
            d: Fq2::ONE,
        }
    }

    /// Scales so the first nonzero entry in reading order is 1. Panics on a
    /// singular matrix.
    pub fn new(ctx: &FieldCtx, a: Fq2, b: Fq2, c: Fq2, d: Fq2) -> Self {
        let det = ctx.sub(ctx.mul(a, d), ctx.mul(b, c));
        assert!(!det.is_zero(), "singular homography");
        let first = [a, b, c, d].into_iter().find(|x| !x.is_zero()).unwrap();
        let s = ctx.inv(first);
        Homography {
            a: ctx.mul(a, s),
            b: ctx.mul(b, s),
            c: ctx.mul(c, s),
            d: ctx.mul(d, s),
        }
    }

    pub fn det(&self, ctx: &FieldCtx) -> Fq2 {
        ctx.sub(ctx.mul(self.a, self.d), ctx.mul(self.b, self.c))
    }

    /// self * other (apply `other` first).
    pub fn compose(&self, other: &Homography, ctx: &FieldCtx) -> Homography {
        let m = |x: Fq2, y: Fq2, z: Fq2, w: Fq2| ctx.add(ctx.mul(x, y), ctx.mul(z, w));
        Homography::new(
            ctx,
            m(self.a, other.a, self.b, other.c),
            m(self.a, other.b, self.b, other.d),
            m(self.c, other.a, self.d, other.c),
            m(self.c, other.b, self.d, other.d),
        )
    }

    pub fn inverse(&self, ctx: &FieldCtx) -> Homography {
        Homography::new(ctx, self.d, ctx.neg(self.b), ctx.neg(self.c), self.a)
    }

    pub fn is_over_fq(&self, ctx: &FieldCtx) -> bool {
        [self.a, self.b, self.c, self.d]
            .into_iter()
            .all(|x| ctx.is_in_subfield(x))
    }

    pub fn apply(&self, ctx: &FieldCtx, pt: ProjPoint) -> ProjPoint {
        let inf = infinity(ctx);
        // homogeneous (x : z)
        let (x, z) = if pt == inf {
            (Fq2::ONE, Fq2::ZERO)
        } else {
            (ctx.from_packed(pt), Fq2::ONE)
        };
        let num = ctx.add(ctx.mul(self.a, x), ctx.mul(self.b, z));
        let den = ctx.add(ctx.mul(self.c, x), ctx.mul(self.d, z));
        if den.is_zero() {
            inf
        } else {
            ctx.to_packed(ctx.div(num, den))
        }
    }
}

#[derive(Clone, Debug)]
pub struct CosetRep {
    pub m: Homography,
    /// sorted point indices of m^{-1} * P^1(F_q).
    pub block: Vec<ProjPoint>,
}

impl CosetRep {
    fn from_image(ctx: &FieldCtx, image_of: Homography, mut block: Vec<ProjPoint>) -> Self {
        block.sort_unstable();
        CosetRep {
            m: image_of.inverse(ctx),
            block,
        }
    }

    /// Canonical byte string of the sorted block.
    pub fn key(&self) -> Vec<u8> {
        self.block.iter().flat_map(|p| p.to_be_bytes()).collect()
    }

    pub fn key_hex(&self) -> String {
        self.key().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn contains(&self, pt: ProjPoint) -> bool {
        self.block.binary_search(&pt).is_ok()
    }
}

/// 0/1 vector of length q^2 + 1 with ones on the block.
pub fn incidence_vector(ctx: &FieldCtx, rep: &CosetRep) -> Vec<u8> {
    let mut v = vec![0u8; ctx.size() as usize + 1];
    for &p in &rep.block {
        v[p as usize] = 1;
    }
    v
}

/// Image of P^1(F_q) under `h`, unsorted.
pub fn image_of_rational_line(ctx: &FieldCtx, h: &Homography) -> Vec<ProjPoint> {
    let inf = infinity(ctx);
    let mut out: Vec<ProjPoint> = ctx
        .subfield()
        .iter()
        .map(|&t| h.apply(ctx, ctx.to_packed(t)))
        .collect();
    out.push(h.apply(ctx, inf));
    out
}

/// Smallest-packed representatives of F_{q^2}^* / F_q^*.
fn direction_transversal(ctx: &FieldCtx) -> Vec<Fq2> {
    let mut seen = vec![false; ctx.size() as usize];
    let mut out = Vec::new();
    let units: Vec<Fq2> = ctx.subfield().iter().copied().filter(|x| !x.is_zero()).collect();
    for x in ctx.elements().skip(1) {
        let px = ctx.to_packed(x) as usize;
        if seen[px] {
            continue;
        }
        out.push(x);
        for &t in &units {
            seen[ctx.to_packed(ctx.mul(x, t)) as usize] = true;
        }
    }
    out
}

/// Smallest-packed representatives of F_{q^2} / (F_q * v).
fn offset_transversal(ctx: &FieldCtx, v: Fq2) -> Vec<Fq2> {
    let mut seen = vec![false; ctx.size() as usize];
    let mut out = Vec::new();
    for u in ctx.elements() {
        if seen[ctx.to_packed(u) as usize] {
            continue;
        }
        out.push(u);
        for &t in ctx.subfield() {
            seen[ctx.to_packed(ctx.add(u, ctx.mul(t, v))) as usize] = true;
        }
    }
    out
}

/// Smallest packed element outside F_q.
pub fn first_non_subfield(ctx: &FieldCtx) -> Fq2 {
    ctx.elements()
        .find(|&x| !ctx.is_in_subfield(x))
        .expect("F_q^2 is larger than F_q")
}

/// All q^3 + q coset representatives in the canonical order: the rational
/// block, then the blocks through infinity (affine F_q-lines), then the
/// circles avoiding infinity sorted by key.
pub fn enumerate_cosets(ctx: &FieldCtx) -> Result<Vec<CosetRep>> {
    let q = ctx.q();
    let size = ctx.size();
    let expected = q * q * q + q;
    let mut out = Vec::with_capacity(expected as usize);
    out.push(CosetRep::from_image(
        ctx,
        Homography::identity(),
        image_of_rational_line(ctx, &Homography::identity()),
    ));

    for v in direction_transversal(ctx) {
        for u in offset_transversal(ctx, v) {
            if v == Fq2::ONE && u.is_zero() {
                continue;
            }
            let h = Homography::new(ctx, v, u, Fq2::ZERO, Fq2::ONE);
            out.push(CosetRep::from_image(ctx, h, image_of_rational_line(ctx, &h)));
        }
    }

    // (a t + b) / (t + d0): every circle avoiding infinity has exactly q + 1
    // such parametrizations, one for each of its points as a = image of
    // infinity; keep the one where a is the smallest point.
    let d0 = first_non_subfield(ctx);
    let sub: Vec<Fq2> = ctx.subfield().to_vec();
    // 1 / (t + d0) for t in F_q, never zero or infinite
    let inv_den: Vec<Fq2> = sub.iter().map(|&t| ctx.inv(ctx.add(t, d0))).collect();
    let mut circles = Vec::new();
    let mut block = Vec::with_capacity(q as usize + 1);
    for pa in 0..size as u32 {
        let a = ctx.from_packed(pa);
        let ad0 = ctx.mul(a, d0);
        'b: for pb in 0..size as u32 {
            let b = ctx.from_packed(pb);
            if b == ad0 {
                continue;
            }
            block.clear();
            block.push(pa);
            for (&t, &w) in sub.iter().zip(&inv_den) {
                let pt = ctx.to_packed(ctx.mul(ctx.add(ctx.mul(a, t), b), w));
                if pt < pa {
                    continue 'b;
                }
                block.push(pt);
            }
            let h = Homography::new(ctx, a, b, Fq2::ONE, d0);
            circles.push(CosetRep::from_image(ctx, h, block.clone()));
        }
    }
    circles.sort_by(|x, y| x.block.cmp(&y.block));
    out.extend(circles);

    let found = out.len() as u64;
    if found != expected {
        return Err(Error::InternalCountMismatch { expected, found });
    }
    let distinct: HashSet<&[ProjPoint]> = out.iter().map(|c| c.block.as_slice()).collect();
    if distinct.len() as u64 != expected {
        return Err(Error::InternalCountMismatch {
            expected,
            found: distinct.len() as u64,
        });
    }
    Ok(out)
}

/// The canonical stream reshuffled under a seed.
pub fn enumerate_cosets_shuffled(ctx: &FieldCtx, seed: u64) -> Result<Vec<CosetRep>> {
    let mut all = enumerate_cosets(ctx)?;
    let mut rng = SeedSplitter::new(seed).stream("coset-order");
    all.shuffle(&mut rng);
    Ok(all)
}
