//! CSV serialisation of study results. Floats use the shortest representation
//! that round-trips; missing values are empty fields.

use std::fmt::Write;

use crate::area::AreaRecord;
use crate::fem::ConvergenceRecord;
use crate::interp::AuditTable;
use crate::lantern::LanternRow;

pub const AUDIT_HEADER: &str = "mesh_id,alpha,N,elem,p,err_w1p,RK,CK,semi2,ratio_C,ratio_R";
pub const SWEEP_HEADER: &str = "alpha,N,h_max,R_max,ndof,h1_semi,h1,l2,cg_iters";
pub const LANTERN_HEADER: &str = "n,m,m_over_n2,A_E,R,area_gap_to_cylinder";
pub const AREA_HEADER: &str = "field,alpha,N,R_max,A_E,exact,gap";

/// Round-trip float formatting.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn opt_int(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn audit_csv(table: &AuditTable) -> String {
    let mut s = String::from(AUDIT_HEADER);
    s.push('\n');
    for r in &table.rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.mesh_id,
            opt_num(r.alpha),
            opt_int(r.n),
            r.elem,
            r.p,
            num(r.err_w1p),
            num(r.r_circ),
            num(r.c_kobayashi),
            num(r.semi2),
            opt_num(r.ratio_c),
            num(r.ratio_r)
        )
        .unwrap();
    }
    s
}

pub fn sweep_csv(records: &[ConvergenceRecord]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            num(r.alpha),
            r.n,
            num(r.h_max),
            num(r.r_max),
            r.ndof,
            num(r.h1_semi),
            num(r.h1),
            num(r.l2),
            r.cg_iters
        )
        .unwrap();
    }
    s
}

pub fn lantern_csv(rows: &[LanternRow]) -> String {
    let mut s = String::from(LANTERN_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.n,
            r.m,
            num(r.m_over_n2),
            num(r.a_e),
            num(r.r),
            num(r.area_gap_to_cylinder)
        )
        .unwrap();
    }
    s
}

pub fn area_csv(records: &[AreaRecord]) -> String {
    let mut s = String::from(AREA_HEADER);
    s.push('\n');
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.field,
            num(r.alpha),
            r.n,
            num(r.r_max),
            num(r.a_e),
            num(r.exact),
            num(r.gap)
        )
        .unwrap();
    }
    s
}
