//! Export of the linearized Chebyshev problem in CPLEX LP format, for
//! cross-checking with an external MIP solver.

use std::fmt::Write;

use crate::error::{ChuteError, Result};
use crate::instances::MomipInstance;
use crate::scalarization::ChebyshevParams;

/// Formats like C's `%.12g`.
pub fn format_g12(v: f64) -> String {
    const P: i32 = 12;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..P).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, v);
        trim_zeros(&fixed).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn term(out: &mut String, coef: f64, var: &str) {
    if coef == 0.0 {
        return;
    }
    let sign = if coef < 0.0 { '-' } else { '+' };
    let _ = write!(out, " {sign} {} {var}", format_g12(coef.abs()));
}

/// Writes `min s` subject to
/// `s >= lambda_l (y*_l - f_l(x)) + rho sum_i (y*_i - f_i(x))` for every `l`,
/// the knapsack rows and binary `x`. The optimal `s` equals the augmented
/// Chebyshev value.
pub fn export_lp(inst: &MomipInstance, params: &ChebyshevParams) -> Result<String> {
    if params.k() != inst.k() {
        return Err(ChuteError::dimension("parameter and instance dimensions differ"));
    }
    let (k, n) = (inst.k(), inst.n());
    let y = params.y_star().values();
    let rho = params.rho();
    let y_sum: f64 = y.iter().sum();
    let mut out = String::new();
    let _ = writeln!(out, "\\ instance {}", inst.name());
    out.push_str("Minimize\n obj: s\nSubject To\n");
    for (l, y_l) in y.iter().enumerate() {
        let w = params.lambda().get(l);
        let mut row = String::new();
        for j in 0..n {
            let coef = w * inst.objectives()[l][j] + rho * (0..k).map(|i| inst.objectives()[i][j]).sum::<f64>();
            term(&mut row, coef, &format!("x{}", j + 1));
        }
        let rhs = w * y_l + rho * y_sum;
        let _ = writeln!(out, " cheb{}: s{row} >= {}", l + 1, format_g12(rhs));
    }
    for (p, (a, b)) in inst.constraints().iter().zip(inst.rhs()).enumerate() {
        let mut row = String::new();
        for (j, &v) in a.iter().enumerate() {
            term(&mut row, v, &format!("x{}", j + 1));
        }
        let row = row.strip_prefix(" + ").map(|r| format!(" {r}")).unwrap_or(row);
        let lhs = if row.is_empty() { " 0 x1".to_string() } else { row };
        let _ = writeln!(out, " knap{}:{lhs} <= {}", p + 1, format_g12(*b));
    }
    out.push_str("Bounds\n s free\nBinary\n");
    for j in 0..n {
        let _ = writeln!(out, " x{}", j + 1);
    }
    out.push_str("End\n");
    Ok(out)
}
