//! wasm-bindgen exports for the static page in `www/`. The logic lives in
//! plain functions (`ops`) so native tests can call them.

use wasm_bindgen::prelude::*;

pub mod ops {
    use qpdlog::analytics::{dickman_rho, h_scan_field, SmoothCountTable};
    use qpdlog::arith::factor_u64;
    use qpdlog::FieldCtx;

    /// rho(u) at u = 0, step, 2*step, ... up to u_max (at most 20).
    pub fn dickman_curve(u_max: f64, step: f64) -> Result<Vec<f64>, String> {
        if !(step > 0.0) || !(0.0..=20.0).contains(&u_max) {
            return Err("need step > 0 and 0 <= u_max <= 20".into());
        }
        let n = (u_max / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| dickman_rho(i as f64 * step)).collect())
    }

    /// For m = 1..=n: probability that a random monic degree-n polynomial
    /// over F_Q is m-smooth (exact count / Q^n).
    pub fn smooth_probabilities(q: u32, n: u32) -> Result<Vec<f64>, String> {
        if q < 2 || !(1..=200).contains(&n) {
            return Err("need Q >= 2 and 1 <= n <= 200".into());
        }
        let t = SmoothCountTable::new(q as u64, n as usize);
        Ok((1..=n as usize).map(|m| t.probability(n as usize, m)).collect())
    }

    /// The exact count N(n, m) in decimal.
    pub fn smooth_count(q: u32, n: u32, m: u32) -> Result<String, String> {
        if q < 2 || m < 1 || m > n || n > 200 {
            return Err("need Q >= 2 and 1 <= m <= n <= 200".into());
        }
        Ok(SmoothCountTable::new(q as u64, n as usize)
            .get(n as usize, m as usize)
            .to_string())
    }

    /// For k = 1..=q: packed encoding of the first a in F_{q^2} such that
    /// X^q + X^2 + a has an irreducible factor of degree k, or -1.
    pub fn h_scan(q: u32) -> Result<Vec<i32>, String> {
        let f = factor_u64(q as u64);
        if f.len() != 1 || q > 256 {
            return Err("need a prime power q <= 256".into());
        }
        let ctx = FieldCtx::new(f[0].0, f[0].1, 0).map_err(|e| e.to_string())?;
        Ok(h_scan_field(&ctx, q as usize)
            .into_values()
            .map(|a| a.map_or(-1, |a| ctx.to_packed(a) as i32))
            .collect())
    }
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub fn dickman_curve(u_max: f64, step: f64) -> Result<Vec<f64>, JsError> {
    ops::dickman_curve(u_max, step).map_err(js)
}

#[wasm_bindgen]
pub fn smooth_probabilities(q: u32, n: u32) -> Result<Vec<f64>, JsError> {
    ops::smooth_probabilities(q, n).map_err(js)
}

#[wasm_bindgen]
pub fn smooth_count(q: u32, n: u32, m: u32) -> Result<String, JsError> {
    ops::smooth_count(q, n, m).map_err(js)
}

#[wasm_bindgen]
pub fn h_scan(q: u32) -> Result<Vec<i32>, JsError> {
    ops::h_scan(q).map_err(js)
}
