//! Browser bindings for the demo page in `www/`.
//!
//! Every function takes a triple document (the same JSON the CLI reads) and
//! returns flat `Float64Array`s so the page can plot without extra parsing.

use wasm_bindgen::prelude::*;

use levycalc::classify::{classify_order, DEFAULT_PER_DECADE, MAX_ORDER_CAP};
use levycalc::doc::parse_triple;
use levycalc::exponent::exponent;
use levycalc::measure::Direction;
use levycalc::simulate::linear_grid;
use levycalc::transform::j_alpha;
use levycalc::triple::{LevyTriple, RadiusGrid};
use levycalc::LevyError;

fn js(e: LevyError) -> JsError {
    JsError::new(&e.to_string())
}

fn image(doc: &str, alpha: f64) -> Result<LevyTriple, JsError> {
    let t = parse_triple(doc).map_err(js)?;
    j_alpha(&t, alpha).map_err(js)
}

/// [y..., Re φ..., Im φ...] for the characteristic function exp Φ of the
/// 𝒥^α image on `points` values of y in [−ymax, ymax].
#[wasm_bindgen]
pub fn cf_curve(doc: &str, alpha: f64, ymax: f64, points: usize) -> Result<Vec<f64>, JsError> {
    if points < 2 || !(ymax > 0.0) {
        return Err(JsError::new("need at least two points and a positive range"));
    }
    let phi = exponent(&image(doc, alpha)?).map_err(js)?;
    let ys = linear_grid(-ymax, ymax, points);
    let mut re = Vec::with_capacity(points);
    let mut im = Vec::with_capacity(points);
    for &y in &ys {
        let v = phi.eval(y).map_err(js)?.exp();
        re.push(v.re);
        im.push(v.im);
    }
    Ok([ys, re, im].concat())
}

/// [r..., L(+, r)..., L(−, r)...] for the 𝒥^α image on a geometric grid.
#[wasm_bindgen]
pub fn spectral_curve(doc: &str, alpha: f64, rmin: f64, rmax: f64, per_decade: usize) -> Result<Vec<f64>, JsError> {
    let sf = image(doc, alpha)?.spectral_function();
    let radii = RadiusGrid::geometric(rmin, rmax, per_decade).map_err(js)?.radii;
    let mut out = radii.clone();
    for d in Direction::BOTH {
        for &r in &radii {
            out.push(sf.try_evaluate(d, r).map_err(js)?);
        }
    }
    Ok(out)
}

/// Verified order of the 𝒥^α image, tested up to `max_order`.
#[wasm_bindgen]
pub fn verified_order(doc: &str, alpha: f64, max_order: u32) -> Result<u32, JsError> {
    let t = image(doc, alpha)?;
    let grid = RadiusGrid::for_measure(&t.measure.simplified(), DEFAULT_PER_DECADE);
    let report = classify_order(&t, max_order.clamp(1, MAX_ORDER_CAP), &grid).map_err(js)?;
    Ok(report.order)
}
