//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layout is given per
//! function. The `*_values` functions hold the logic and are callable from
//! native code.

use varsamp::kernels::{average, Kernel};
use varsamp::operators::averaged_sampling_series;
use varsamp::signals::Signal;
use varsamp::variation::{convergence_study, StudyOptions};
use wasm_bindgen::prelude::*;

const SERIES_TOL: f64 = 1e-10;
/// Plot-level accuracy; slowly decaying kernels need about 0.4/tol terms per point.
const DECAYING_SERIES_TOL: f64 = 1e-4;
/// Largest grid the page may request.
pub const MAX_POINTS: usize = 4001;

fn grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>, String> {
    if !(start.is_finite() && stop.is_finite() && start < stop) {
        return Err(format!("need finite start < stop, got {start} and {stop}"));
    }
    if !(2..=MAX_POINTS).contains(&count) {
        return Err(format!("point count must be in 2..={MAX_POINTS}, got {count}"));
    }
    let n = count - 1;
    Ok((0..=n)
        .map(|i| {
            if i == n {
                stop
            } else {
                start + (stop - start) * (i as f64 / n as f64)
            }
        })
        .collect())
}

/// `[t…, χ(t)…, χ̄_m(t)…]`, each block `count` long.
pub fn kernel_curve_values(kernel: &str, m: u32, start: f64, stop: f64, count: usize) -> Result<Vec<f64>, String> {
    let k = Kernel::from_id(kernel).map_err(|e| e.to_string())?;
    let ak = average(&k, m).map_err(|e| e.to_string())?;
    let ts = grid(start, stop, count)?;
    let mut out = ts.clone();
    out.extend(ts.iter().map(|&t| k.evaluate(t)));
    out.extend(ts.iter().map(|&t| ak.evaluate(t)));
    Ok(out)
}

/// `[t…, f(t)…, S̄f(t)…]`, each block `count` long.
#[allow(clippy::too_many_arguments)]
pub fn reconstruct_values(
    signal: &str,
    kernel: &str,
    m: u32,
    w: f64,
    start: f64,
    stop: f64,
    count: usize,
) -> Result<Vec<f64>, String> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(format!("sampling rate must be positive, got {w}"));
    }
    let f = Signal::from_id(signal).map_err(|e| e.to_string())?;
    let k = Kernel::from_id(kernel).map_err(|e| e.to_string())?;
    let ak = average(&k, m).map_err(|e| e.to_string())?;
    let ts = grid(start, stop, count)?;
    let tol = if ak.support().is_compact() {
        SERIES_TOL
    } else {
        DECAYING_SERIES_TOL
    };
    let mut out = ts.clone();
    out.extend(ts.iter().map(|&t| f.evaluate(t)));
    out.extend(ts.iter().map(|&t| averaged_sampling_series(&f, &ak, w, t, tol)));
    Ok(out)
}

/// Rows `(w, V[S̄f - f], V[S̄f], ‖χ‖₁V[f]/m)` flattened.
pub fn convergence_values(signal: &str, kernel: &str, m: u32, rates: &[f64]) -> Result<Vec<f64>, String> {
    if rates.iter().any(|&w| !(w > 0.0 && w <= 64.0)) {
        return Err("sampling rates must lie in (0, 64]".into());
    }
    let f = Signal::from_id(signal).map_err(|e| e.to_string())?;
    let k = Kernel::from_id(kernel).map_err(|e| e.to_string())?;
    let options = StudyOptions {
        start_points: 257,
        ..StudyOptions::default()
    };
    let rows = convergence_study(&f, &k, m, rates, options).map_err(|e| e.to_string())?;
    Ok(rows
        .iter()
        .flat_map(|r| [r.w, r.difference.value, r.output.value, r.bound])
        .collect())
}

#[wasm_bindgen]
pub fn kernel_curve(kernel: &str, m: u32, start: f64, stop: f64, count: usize) -> Result<Vec<f64>, JsError> {
    kernel_curve_values(kernel, m, start, stop, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn reconstruct(
    signal: &str,
    kernel: &str,
    m: u32,
    w: f64,
    start: f64,
    stop: f64,
    count: usize,
) -> Result<Vec<f64>, JsError> {
    reconstruct_values(signal, kernel, m, w, start, stop, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn convergence(signal: &str, kernel: &str, m: u32, rates: &[f64]) -> Result<Vec<f64>, JsError> {
    convergence_values(signal, kernel, m, rates).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_curve_layout() {
        let v = kernel_curve_values("bspline:2", 1, -2.0, 2.0, 5).unwrap();
        assert_eq!(v.len(), 15);
        assert_eq!(&v[..5], &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(v[7], 1.0);
        assert!((v[12] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(kernel_curve_values("nope", 1, 0.0, 1.0, 3).is_err());
        assert!(kernel_curve_values("fejer", 1, 1.0, 0.0, 3).is_err());
        assert!(reconstruct_values("hat", "fejer", 1, 0.0, 0.0, 1.0, 3).is_err());
        assert!(convergence_values("hat", "bspline:2", 1, &[4.0, 2.0]).is_err());
        assert!(convergence_values("hat", "bspline:2", 1, &[1000.0]).is_err());
    }
}
