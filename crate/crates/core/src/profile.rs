//! Rendering of point sources onto grid cells. Conditioning never looks at
//! these profiles; they only decide how much of a source's energy a grid
//! point displays.

/// Share of a one-cell top-hat source at offset `d` that lands in a cell
/// of width `dx` (area weighting; a source on a grid point gives 1 there,
/// one halfway between two points gives 1/2 to each).
pub fn top_hat_share(d: f64, dx: f64) -> f64 {
    if dx <= 0.0 {
        return if d == 0.0 { 1.0 } else { 0.0 };
    }
    (1.0 - d.abs() / dx).max(0.0)
}

/// Share of a unit Gaussian of width `sigma` integrated over a cell of
/// width `dx` (midpoint rule).
pub fn gaussian_share(d: f64, sigma: f64, dx: f64) -> f64 {
    let z = d / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt()) * dx
}

/// Share of a source of display width `sigma` (0 = top-hat).
pub fn share(d: f64, sigma: f64, dx: f64) -> f64 {
    if sigma > 0.0 {
        gaussian_share(d, sigma, dx)
    } else {
        top_hat_share(d, dx)
    }
}
