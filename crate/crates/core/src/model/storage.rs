use alloc::format;
use alloc::vec;

use super::builder::Assembly;
use super::{Family, LinExpr, TechVars};
use crate::data::TechnologySpec;
use crate::lp::RowSense;

const INF: f64 = f64::INFINITY;

/// Columns and rows of one storage technology over one year.
///
/// `soc[t] = soc[t-1] + eta * charge[t] - discharge[t] / eta`, cyclic over the
/// horizon, with `eta` the per-leg efficiency. Charge and discharge are each
/// limited by the power capacity `net`, the state of charge by the energy
/// capacity. Reserves held by storage fit under the unused discharge power
/// and must be backed by one hour of stored energy.
#[allow(clippy::too_many_arguments)]
pub(crate) fn storage_dynamics(
    a: &mut Assembly,
    tech: &TechnologySpec,
    tn: &str,
    yl: &str,
    net: &LinExpr,
    hours: usize,
    scale: f64,
    tv: &mut TechVars,
) {
    let params = tech.storage.as_ref().expect("storage parameters");
    let eta = params.leg_efficiency();
    let cost = scale * tech.var_om;
    for t in 0..hours {
        let d = a.var(format!("dis[{tn}][{yl}][{t}]"), cost, 0.0, INF);
        let c = a.var(format!("chg[{tn}][{yl}][{t}]"), cost, 0.0, INF);
        let e = a.var(format!("soc[{tn}][{yl}][{t}]"), 0.0, 0.0, INF);
        tv.dispatch.push(d);
        tv.charge.push(c);
        tv.soc.push(e);
        a.cap(
            Family::StorageLimit,
            format!("dmax[{tn}][{yl}][{t}]"),
            &[(d, 1.0)],
            1.0,
            net,
        );
        a.cap(
            Family::StorageLimit,
            format!("cmax[{tn}][{yl}][{t}]"),
            &[(c, 1.0)],
            1.0,
            net,
        );
        match params.fixed_energy_capacity {
            Some(energy) => a.lp.upper[e] = energy,
            None => a.cap(
                Family::StorageLimit,
                format!("emax[{tn}][{yl}][{t}]"),
                &[(e, 1.0)],
                params.duration,
                net,
            ),
        }
    }
    for t in 0..hours {
        let prev = tv.soc[(t + hours - 1) % hours];
        a.row(
            Family::StorageBalance,
            format!("soc[{tn}][{yl}][{t}]"),
            vec![
                (tv.soc[t], 1.0),
                (prev, -1.0),
                (tv.charge[t], -eta),
                (tv.dispatch[t], 1.0 / eta),
            ],
            RowSense::Eq,
            0.0,
        );
    }
    if tech.reserve {
        for t in 0..hours {
            let ro = a.var(format!("rop[{tn}][{yl}][{t}]"), 0.0, 0.0, INF);
            let rr = a.var(format!("rreg[{tn}][{yl}][{t}]"), 0.0, 0.0, INF);
            tv.reserve_op.push(ro);
            tv.reserve_reg.push(rr);
            a.cap(
                Family::StorageReserve,
                format!("sres[{tn}][{yl}][{t}]"),
                &[
                    (tv.dispatch[t], 1.0),
                    (tv.charge[t], -1.0),
                    (ro, 1.0),
                    (rr, 1.0),
                ],
                1.0,
                net,
            );
            a.row(
                Family::StorageReserve,
                format!("senergy[{tn}][{yl}][{t}]"),
                vec![(ro, 1.0), (rr, 1.0), (tv.soc[t], -1.0)],
                RowSense::Le,
                0.0,
            );
        }
    }
}
