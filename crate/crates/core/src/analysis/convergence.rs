//! Observed convergence orders between consecutive refinement levels.

use crate::error::{Error, Result};

use super::errors::ErrorReport;

/// Orders of the four tabulated norms; entry `i` compares levels `i` and `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orders {
    pub u_l2: f64,
    pub sigma_l2: f64,
    pub div: f64,
    pub star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub levels: Vec<ErrorReport>,
    pub orders: Vec<Orders>,
}

impl ConvergenceReport {
    /// Orders between the two finest levels.
    pub fn final_orders(&self) -> Option<&Orders> {
        self.orders.last()
    }
}

/// `log(e_coarse / e_fine) / log(h_coarse / h_fine)`.
pub fn observed_order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Per-norm orders for a sequence of levels with strictly decreasing `h`.
pub fn convergence_orders(levels: Vec<ErrorReport>) -> Result<ConvergenceReport> {
    if levels.len() < 2 {
        return Err(Error::InvalidLevels("at least two levels are needed".into()));
    }
    for w in levels.windows(2) {
        if !(w[1].h < w[0].h) {
            return Err(Error::InvalidLevels(format!(
                "h must decrease strictly, got {} then {}",
                w[0].h, w[1].h
            )));
        }
    }
    let orders = levels
        .windows(2)
        .map(|w| {
            let (c, f) = (&w[0], &w[1]);
            let o = |a: f64, b: f64| observed_order(a, b, c.h, f.h);
            Orders {
                u_l2: o(c.err_u_l2, f.err_u_l2),
                sigma_l2: o(c.err_sigma_l2, f.err_sigma_l2),
                div: o(c.err_div, f.err_div),
                star: o(c.err_star, f.err_star),
            }
        })
        .collect();
    Ok(ConvergenceReport { levels, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(n: usize, e: f64) -> ErrorReport {
        ErrorReport {
            one_over_h: n,
            h: 1.0 / n as f64,
            dofs_sigma: 0,
            dofs_u: 0,
            err_u_l2: e,
            err_sigma_l2: e,
            err_div: e,
            err_jump: 0.0,
            err_star: e,
            err_a: e,
            err_u_h1: e,
        }
    }

    #[test]
    fn halving_h_quartering_error_is_order_two() {
        let r = convergence_orders(vec![report(1, 0.4), report(2, 0.1)]).unwrap();
        assert!((r.orders[0].u_l2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_errors_have_order_zero() {
        let r = convergence_orders(vec![report(4, 0.3), report(8, 0.3)]).unwrap();
        assert_eq!(r.orders[0].div, 0.0);
    }

    #[test]
    fn reference_divergence_column() {
        let errs = [3.839803, 1.936584, 0.970346, 0.485431];
        let levels = [4, 8, 16, 32].iter().zip(errs).map(|(&n, e)| report(n, e)).collect();
        let r = convergence_orders(levels).unwrap();
        let rounded: Vec<f64> = r.orders.iter().map(|o| (o.div * 100.0).round() / 100.0).collect();
        assert_eq!(rounded, vec![0.99, 1.0, 1.0]);
    }

    #[test]
    fn non_monotone_h_is_rejected() {
        assert!(convergence_orders(vec![report(8, 0.1), report(4, 0.2)]).is_err());
        assert!(convergence_orders(vec![report(4, 0.1), report(4, 0.2)]).is_err());
        assert!(convergence_orders(vec![report(4, 0.1)]).is_err());
    }
}
