//! LP-format export of the chaining MILP.
//!
//! Row names carry the constraint number and the block ids they refer to,
//! e.g. `c10_1_2`. `s` and `t` stand for the depot on the way out and back.
//! The depot's own SOC `b_s` is fixed to zero and `u_s_j` is capped by the
//! battery on used dispatch arcs only (`c10s_j`); without that row an unused
//! dispatch arc could inject charge into the middle of a run.
//!
//! The max in the SOC recursion and the min in the overnight SOC are written
//! either as big-M rows with auxiliary binaries `x` and `n`, or as general
//! `MAX`/`MIN` constraints over free helper variables.

use std::fmt::Write as _;
use std::path::Path;

use super::BcpInstance;
use crate::error::BcpError;

/// Terms of one linear expression, written in insertion order.
#[derive(Default)]
struct Expr(Vec<(f64, String)>);

impl Expr {
    fn add(mut self, coef: f64, var: impl Into<String>) -> Self {
        self.0.push((coef, var.into()));
        self
    }

    fn push(&mut self, coef: f64, var: impl Into<String>) {
        self.0.push((coef, var.into()));
    }

    fn render(&self) -> String {
        let mut s = String::new();
        for (k, (c, v)) in self.0.iter().enumerate() {
            if k > 0 && k % 8 == 0 {
                s.push_str("\n  ");
            }
            let sign = if *c < 0.0 { "-" } else { "+" };
            let mag = c.abs();
            if k == 0 && sign == "+" {
                if mag == 1.0 {
                    write!(s, "{v}").unwrap();
                } else {
                    write!(s, "{mag} {v}").unwrap();
                }
            } else if mag == 1.0 {
                write!(s, " {sign} {v}").unwrap();
            } else {
                write!(s, " {sign} {mag} {v}").unwrap();
            }
        }
        s
    }
}

struct Lp {
    rows: String,
    general: String,
}

impl Lp {
    fn row(&mut self, name: String, e: &Expr, sense: &str, rhs: f64) {
        writeln!(self.rows, " {name}: {} {sense} {rhs}", e.render()).unwrap();
    }
}

pub fn write_lp(inst: &BcpInstance, linearized: bool, assume_full_initial: bool) -> String {
    let p = &inst.params;
    let (m1, m2, cap) = (inst.big_m1, inst.big_m2, p.battery_cap);
    let n = inst.len();
    let id = |k: usize| inst.block(k).id;
    let day = inst.day_arcs();
    let night = inst.night_arcs();

    let mut out = String::new();
    out.push_str("\\ Block chaining MILP\nMinimize\n");
    let mut obj = Expr::default();
    for &(i, j) in &day {
        obj.push(inst.arc_cost(i, j), format!("y_{}_{}", id(i), id(j)));
    }
    for j in 0..n {
        obj.push(p.vehicle_cost, format!("y_s_{}", id(j)));
    }
    let obj_text = if obj.0.is_empty() { "0".to_string() } else { obj.render() };
    writeln!(out, " obj: {obj_text}").unwrap();
    out.push_str("Subject To\n");

    let mut lp = Lp {
        rows: String::new(),
        general: String::new(),
    };

    // Chaining.
    for i in 0..n {
        let mut e = Expr::default();
        for &(a, b) in day.iter().filter(|&&(a, _)| a == i) {
            e.push(1.0, format!("y_{}_{}", id(a), id(b)));
        }
        e.push(1.0, format!("y_{}_t", id(i)));
        lp.row(format!("c5_{}", id(i)), &e, "=", 1.0);
    }
    for j in 0..n {
        let mut e = Expr::default();
        for &(a, b) in day.iter().filter(|&&(_, b)| b == j) {
            e.push(1.0, format!("y_{}_{}", id(a), id(b)));
        }
        e.push(1.0, format!("y_s_{}", id(j)));
        lp.row(format!("c6_{}", id(j)), &e, "=", 1.0);
    }

    // SOC carried along every arc of A: (from label, to label, b var, B_from).
    let mut a_arcs: Vec<(String, String, String, f64)> = Vec::new();
    for &(i, j) in &day {
        a_arcs.push((id(i).to_string(), id(j).to_string(), format!("b_{}", id(i)), inst.consumption(i)));
    }
    for j in 0..n {
        a_arcs.push(("s".into(), id(j).to_string(), "b_s".into(), 0.0));
    }
    for i in 0..n {
        a_arcs.push((id(i).to_string(), "t".into(), format!("b_{}", id(i)), inst.consumption(i)));
    }
    for (a, b, bvar, cons) in &a_arcs {
        let (v, u, y, x) = (
            format!("v_{a}_{b}"),
            format!("u_{a}_{b}"),
            format!("y_{a}_{b}"),
            format!("x_{a}_{b}"),
        );
        if linearized {
            let e = Expr::default()
                .add(1.0, &v)
                .add(-1.0, bvar)
                .add(-1.0, &u)
                .add(-m1, &y);
            lp.row(format!("c16_{a}_{b}"), &e, ">=", -cons - m1);
            let e = Expr::default()
                .add(1.0, &v)
                .add(-1.0, bvar)
                .add(-1.0, &u)
                .add(-m1, &y)
                .add(-m1, &x);
            lp.row(format!("c17_{a}_{b}"), &e, "<=", -cons - m1);
            let e = Expr::default().add(1.0, &v).add(m1, &x);
            lp.row(format!("c18_{a}_{b}"), &e, "<=", m1);
        } else {
            let w = format!("w7_{a}_{b}");
            let e = Expr::default()
                .add(1.0, &w)
                .add(-1.0, bvar)
                .add(-1.0, &u)
                .add(-m1, &y);
            lp.row(format!("c7_def_{a}_{b}"), &e, "=", -cons - m1);
            writeln!(lp.general, " c7_max_{a}_{b}: {v} = MAX ( {w} , 0 )").unwrap();
        }
    }

    for j in 0..n {
        let mut e = Expr::default().add(1.0, format!("b_{}", id(j)));
        for &(a, b) in day.iter().filter(|&&(_, b)| b == j) {
            e.push(-1.0, format!("v_{}_{}", id(a), id(b)));
        }
        e.push(-1.0, format!("v_s_{}", id(j)));
        lp.row(format!("c8_{}", id(j)), &e, "=", 0.0);
    }
    for &(i, j) in &day {
        let (a, b) = (id(i), id(j));
        let e = Expr::default()
            .add(1.0, format!("u_{a}_{b}"))
            .add(-inst.day_charge_cap(i, j), format!("y_{a}_{b}"));
        lp.row(format!("c10_{a}_{b}"), &e, "<=", 0.0);
    }
    for j in 0..n {
        let b = id(j);
        let e = Expr::default()
            .add(1.0, format!("u_s_{b}"))
            .add(-cap, format!("y_s_{b}"));
        lp.row(format!("c10s_{b}"), &e, "<=", 0.0);
    }
    for i in 0..n {
        let e = Expr::default().add(1.0, format!("u_{}_t", id(i)));
        lp.row(format!("c11_{}", id(i)), &e, "=", 0.0);
    }

    // Next horizon.
    for &(i, j) in &night {
        let (a, b) = (id(i), id(j));
        let g = inst.night_charge(i, j);
        let (vp, vit, ysj, yit, nn) = (
            format!("vp_{a}_{b}"),
            format!("v_{a}_t"),
            format!("y_s_{b}"),
            format!("y_{a}_t"),
            format!("n_{a}_{b}"),
        );
        if linearized {
            lp.row(format!("c19_{a}_{b}"), &Expr::default().add(1.0, &vp), "<=", cap);
            let e = Expr::default()
                .add(1.0, &vp)
                .add(-1.0, &vit)
                .add(-m1, &ysj)
                .add(-m1, &yit);
            lp.row(format!("c20_{a}_{b}"), &e, "<=", g - 2.0 * m1);
            let e = Expr::default().add(1.0, &vp).add(m2, &nn);
            lp.row(format!("c21_{a}_{b}"), &e, ">=", cap);
            let e = Expr::default()
                .add(1.0, &vp)
                .add(-1.0, &vit)
                .add(-m1, &ysj)
                .add(-m1, &yit)
                .add(-m1, &nn);
            lp.row(format!("c22_{a}_{b}"), &e, ">=", g - 3.0 * m1);
        } else {
            let w = format!("w12_{a}_{b}");
            let e = Expr::default()
                .add(1.0, &w)
                .add(-1.0, &vit)
                .add(-m1, &ysj)
                .add(-m1, &yit);
            lp.row(format!("c12_def_{a}_{b}"), &e, "=", g - 2.0 * m1);
            writeln!(lp.general, " c12_min_{a}_{b}: {vp} = MIN ( {w} , {cap} )").unwrap();
        }
        let e = Expr::default()
            .add(1.0, &vp)
            .add(-1.0, format!("b_{b}"))
            .add(-m2, format!("z_{a}_{b}"));
        lp.row(format!("c13_{a}_{b}"), &e, ">=", -m2);
    }
    for j in 0..n {
        let mut e = Expr::default();
        for &(a, b) in night.iter().filter(|&&(_, b)| b == j) {
            e.push(1.0, format!("z_{}_{}", id(a), id(b)));
        }
        e.push(-1.0, format!("y_s_{}", id(j)));
        lp.row(format!("c14_{}", id(j)), &e, "=", 0.0);
    }
    for i in 0..n {
        let mut e = Expr::default();
        for &(a, b) in night.iter().filter(|&&(a, _)| a == i) {
            e.push(1.0, format!("z_{}_{}", id(a), id(b)));
        }
        e.push(-1.0, format!("y_{}_t", id(i)));
        lp.row(format!("c15_{}", id(i)), &e, "=", 0.0);
    }
    if assume_full_initial {
        for j in 0..n {
            let b = id(j);
            let e = Expr::default()
                .add(1.0, format!("v_s_{b}"))
                .add(-cap, format!("y_s_{b}"));
            lp.row(format!("c23_{b}"), &e, "=", 0.0);
        }
    }
    out.push_str(&lp.rows);

    out.push_str("Bounds\n");
    if n > 0 {
        out.push_str(" b_s = 0\n");
    }
    for i in 0..n {
        writeln!(out, " {} <= b_{} <= {cap}", inst.consumption(i), id(i)).unwrap();
    }
    for &(i, j) in &night {
        writeln!(out, " vp_{}_{} free", id(i), id(j)).unwrap();
        if !linearized {
            writeln!(out, " w12_{}_{} free", id(i), id(j)).unwrap();
        }
    }
    if !linearized {
        for (a, b, _, _) in &a_arcs {
            writeln!(out, " w7_{a}_{b} free").unwrap();
        }
    }

    let mut bins: Vec<String> = Vec::new();
    for (a, b, _, _) in &a_arcs {
        bins.push(format!("y_{a}_{b}"));
    }
    for &(i, j) in &night {
        bins.push(format!("z_{}_{}", id(i), id(j)));
    }
    if linearized {
        for (a, b, _, _) in &a_arcs {
            bins.push(format!("x_{a}_{b}"));
        }
        for &(i, j) in &night {
            bins.push(format!("n_{}_{}", id(i), id(j)));
        }
    }
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for chunk in bins.chunks(8) {
            writeln!(out, " {}", chunk.join(" ")).unwrap();
        }
    }
    if !lp.general.is_empty() {
        out.push_str("General Constraints\n");
        out.push_str(&lp.general);
    }
    out.push_str("End\n");
    out
}

pub fn write_lp_file(
    inst: &BcpInstance,
    path: &Path,
    linearized: bool,
    assume_full_initial: bool,
) -> Result<(), BcpError> {
    std::fs::write(path, write_lp(inst, linearized, assume_full_initial)).map_err(|source| {
        BcpError::Io {
            path: path.to_path_buf(),
            source,
        }
    })
}
