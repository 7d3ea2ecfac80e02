//! Oracles shared by the integration tests, independent of the library's
//! field and polynomial code.
#![allow(dead_code)]

/// F_Q for a prime power Q by full multiplication table; elements are
/// integers whose base-p digits are the coefficients.
pub struct TinyField {
    pub q: usize,
    pub p: usize,
    mul: Vec<u32>,
    add: Vec<u32>,
}

fn prime_power(q: usize) -> Option<(usize, u32)> {
    let mut p = 2;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let (mut n, mut m) = (q, 0);
    while n % p == 0 {
        n /= p;
        m += 1;
    }
    (n == 1 && q > 1).then_some((p, m))
}

pub fn is_prime_power(q: usize) -> bool {
    prime_power(q).is_some()
}

impl TinyField {
    pub fn new(q: usize) -> Self {
        let (p, m) = prime_power(q).expect("prime power");
        let digits = |x: usize| -> Vec<usize> { (0..m).map(|i| x / p.pow(i) % p).collect() };
        let undigits = |d: &[usize]| -> usize { d.iter().rev().fold(0, |a, &c| a * p + c) };
        // monic irreducible of degree m over F_p by brute force: no root of
        // any lower-degree factor, i.e. trial division by all monic polys of
        // degree <= m/2
        let polymod = |a: &[usize], f: &[usize]| -> Vec<usize> {
            let mut a = a.to_vec();
            let df = f.len() - 1;
            while a.len() > df {
                let c = *a.last().unwrap();
                let s = a.len() - 1 - df;
                for (i, &fi) in f.iter().enumerate() {
                    a[s + i] = (a[s + i] + p * p - c * fi % p) % p;
                }
                a.pop();
            }
            a
        };
        let modulus: Vec<usize> = if m == 1 {
            vec![0, 1]
        } else {
            (0..p.pow(m as u32))
                .map(|x| {
                    let mut f = digits(x);
                    f.push(1);
                    f
                })
                .find(|f| {
                    (1..=m as usize / 2).all(|d| {
                        (0..p.pow(d as u32)).all(|y| {
                            let mut g: Vec<usize> = (0..d).map(|i| y / p.pow(i as u32) % p).collect();
                            g.push(1);
                            polymod(f, &g).iter().any(|&c| c != 0)
                        })
                    })
                })
                .unwrap()
        };
        let mut mul = vec![0u32; q * q];
        let mut add = vec![0u32; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let s: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = undigits(&s) as u32;
                if m == 1 {
                    mul[a * q + b] = (a * b % p) as u32;
                    continue;
                }
                let mut prod = vec![0usize; 2 * m as usize - 1];
                for i in 0..m as usize {
                    for j in 0..m as usize {
                        prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
                    }
                }
                let r = polymod(&prod, &modulus);
                let mut r = r;
                r.resize(m as usize, 0);
                mul[a * q + b] = undigits(&r) as u32;
            }
        }
        TinyField { q, p, mul, add }
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b] as usize
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b] as usize
    }
}

/// counts[m] = number of monic degree-n polynomials over F_Q whose
/// irreducible factors all have degree <= m, by marking every product of two
/// monic polynomials of positive degree.
pub fn brute_smooth_counts(q: usize, n: usize) -> Vec<u64> {
    // index of a monic poly of degree d: its lower coefficients in base q
    let f = (n >= 2).then(|| TinyField::new(q));
    // maxdeg[d][idx]
    let mut maxdeg: Vec<Vec<u8>> = (0..=n).map(|d| vec![d as u8; q.pow(d as u32)]).collect();
    if let Some(f) = &f {
        for total in 2..=n {
            for a in 1..=total / 2 {
                let b = total - a;
                for ia in 0..q.pow(a as u32) {
                    let ca = coeffs(ia, a, q);
                    for ib in 0..q.pow(b as u32) {
                        let cb = coeffs(ib, b, q);
                        let mut prod = vec![0usize; total + 1];
                        for (i, &x) in ca.iter().enumerate() {
                            if x == 0 {
                                continue;
                            }
                            for (j, &y) in cb.iter().enumerate() {
                                prod[i + j] = f.add(prod[i + j], f.mul(x, y));
                            }
                        }
                        let idx = prod[..total].iter().rev().fold(0, |acc, &c| acc * q + c);
                        let md = maxdeg[a][ia].max(maxdeg[b][ib]);
                        let slot = &mut maxdeg[total][idx];
                        *slot = (*slot).min(md);
                    }
                }
            }
        }
    }
    let mut counts = vec![0u64; n + 1];
    for &md in &maxdeg[n] {
        for (m, c) in counts.iter_mut().enumerate() {
            if md as usize <= m {
                *c += 1;
            }
        }
    }
    counts
}

fn coeffs(idx: usize, d: usize, q: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..d).map(|i| idx / q.pow(i as u32) % q).collect();
    v.push(1);
    v
}

/// rho by piecewise Taylor series: on [k-1, k] write rho(k - x) = sum a_i x^i;
/// (k - x) rho_k'(x) = rho_{k-1}(x) gives a_{i+1} = (b_i + i a_i) / (k (i+1))
/// and continuity at u = k - 1 fixes a_0.
pub struct TaylorRho {
    coeffs: Vec<Vec<f64>>,
}

impl TaylorRho {
    pub fn new(k_max: usize) -> Self {
        const TERMS: usize = 120;
        let mut coeffs = vec![vec![0.0; TERMS]];
        coeffs[0][0] = 1.0; // rho_1 = 1 on [0, 1]
        for k in 2..=k_max {
            let b = &coeffs[k - 2];
            let mut a = vec![0.0; TERMS];
            for i in 0..TERMS - 1 {
                a[i + 1] = (b[i] + i as f64 * a[i]) / (k as f64 * (i + 1) as f64);
            }
            // rho_k(1) = rho(k - 1) = rho_{k-1}(0) = b_0
            a[0] = b[0] - a[1..].iter().sum::<f64>();
            coeffs.push(a);
        }
        TaylorRho { coeffs }
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= 1.0 {
            return 1.0;
        }
        let k = u.ceil() as usize;
        let x = k as f64 - u;
        self.coeffs[k - 1].iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}
