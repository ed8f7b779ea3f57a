//! Per-tick trace records, CSV round-tripping, summary metrics and plot
//! data extraction.
//!
//! Floats are written with the shortest round-trip representation, so a
//! written and re-read trace compares equal field by field and re-running
//! the same scenario yields byte-identical files.

use super::SimError;
use crate::kinematics::Mode;
use crate::math::{UnitQuat, Vec3};
use std::io::{BufRead, Write};

/// Trace schema tag written in the first line of every trace file.
pub const TRACE_SCHEMA: &str = "srb-trace-v1";

/// One control-period snapshot of the closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t_s: f64,
    /// Joint vector `[x, y, yaw, arm…]`.
    pub q: Vec<f64>,
    /// Admittance-model end-effector pose (the commanded state).
    pub ee_p: Vec3,
    pub ee_q: UnitQuat,
    /// Actual chain end-effector pose.
    pub fk_p: Vec3,
    pub fk_q: UnitQuat,
    pub god_p: Vec3,
    pub god_q: UnitQuat,
    /// Commanded twist `[ṗ; ω]`.
    pub v: [f64; 6],
    pub f_h: Vec3,
    pub tau_h: Vec3,
    pub u_c_force: Vec3,
    pub u_c_torque: Vec3,
    /// Measured posture score and its sub-factors
    /// (abduction, flexion, rotation, elbow, bending).
    pub a: f64,
    pub a_sub: [f64; 5],
    /// Score fed to the controller (1 in baseline runs).
    pub a_ctrl: f64,
    pub f_gate: f64,
    pub d_vp: f64,
    pub d_vo: f64,
    pub d_fp: f64,
    pub d_fo: f64,
    pub p_e_norm: f64,
    pub psi_e: f64,
    pub storage: f64,
    pub work_in: f64,
    pub bound: f64,
    pub mode: Mode,
    /// Repulsive base velocity (base frame).
    pub v_xy: [f64; 2],
    pub min_leg_dist: Option<f64>,
    pub xe_pos_norm: f64,
    pub xe_rot_norm: f64,
    pub clamped: bool,
    pub degenerate: bool,
    pub repulsion_blocked: bool,
}

/// A full run: the arm dof (for the variable-width joint columns) plus one
/// record per tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLog {
    pub arm_dof: usize,
    pub records: Vec<TraceRecord>,
}

/// Mean score, non-ergonomic time, boundary touches and base proximity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSummary {
    /// Mean posture score over the run.
    pub a_bar: f64,
    /// Percentage of ticks spent at `a = 0`.
    pub zeta_ne_percent: f64,
    /// Count of transitions from `a > 0` to `a = 0`.
    pub beta: u64,
    /// Percentage of ticks with the leg-to-base distance below `d_0`.
    pub zeta_d_percent: f64,
}

fn header_columns(arm_dof: usize) -> Vec<String> {
    let mut cols: Vec<String> = vec![
        "t_s".into(),
        "q_base_x_m".into(),
        "q_base_y_m".into(),
        "q_base_yaw_rad".into(),
    ];
    for i in 0..arm_dof {
        cols.push(format!("q_arm_{i}_rad"));
    }
    let vec3 = |stem: &str, cols: &mut Vec<String>| {
        for ax in ["x", "y", "z"] {
            cols.push(format!("{stem}_{ax}"));
        }
    };
    let quat = |stem: &str, cols: &mut Vec<String>| {
        for p in ["w", "x", "y", "z"] {
            cols.push(format!("{stem}_{p}"));
        }
    };
    vec3("ee_p_m", &mut cols);
    quat("ee_q", &mut cols);
    vec3("fk_p_m", &mut cols);
    quat("fk_q", &mut cols);
    vec3("god_p_m", &mut cols);
    quat("god_q", &mut cols);
    for name in [
        "v_lin_x", "v_lin_y", "v_lin_z", "v_ang_x", "v_ang_y", "v_ang_z",
    ] {
        cols.push(name.into());
    }
    vec3("f_h_n", &mut cols);
    vec3("tau_h_nm", &mut cols);
    vec3("u_c_f_n", &mut cols);
    vec3("u_c_tau_nm", &mut cols);
    for name in [
        "a",
        "a_abduction",
        "a_flexion",
        "a_rotation",
        "a_elbow",
        "a_bending",
        "a_ctrl",
        "f",
        "d_vp",
        "d_vo",
        "d_fp",
        "d_fo",
        "p_e_norm_m",
        "psi_e",
        "storage_j",
        "work_in_j",
        "bound_j",
        "mode",
        "v_xy_x_m_per_s",
        "v_xy_y_m_per_s",
        "min_leg_dist_m",
        "xe_pos_norm_m",
        "xe_rot_norm",
        "clamped",
        "degenerate",
        "repulsion_blocked",
    ] {
        cols.push(name.into());
    }
    cols
}

fn push_vec3(fields: &mut Vec<String>, v: &Vec3) {
    fields.push(v.x.to_string());
    fields.push(v.y.to_string());
    fields.push(v.z.to_string());
}

fn push_quat(fields: &mut Vec<String>, q: &UnitQuat) {
    fields.push(q.eta().to_string());
    let e = q.eps();
    fields.push(e.x.to_string());
    fields.push(e.y.to_string());
    fields.push(e.z.to_string());
}

/// Write the trace as CSV (schema line, header row, one row per tick).
pub fn write_trace<W: Write>(log: &TraceLog, mut out: W) -> Result<(), SimError> {
    writeln!(out, "# {TRACE_SCHEMA} arm_dof={}", log.arm_dof)?;
    writeln!(out, "{}", header_columns(log.arm_dof).join(","))?;
    for r in &log.records {
        if r.q.len() != 3 + log.arm_dof {
            return Err(SimError::Trace(format!(
                "record at t={} has {} joints, expected {}",
                r.t_s,
                r.q.len(),
                3 + log.arm_dof
            )));
        }
        let mut fields: Vec<String> = Vec::with_capacity(70);
        fields.push(r.t_s.to_string());
        for qi in &r.q {
            fields.push(qi.to_string());
        }
        push_vec3(&mut fields, &r.ee_p);
        push_quat(&mut fields, &r.ee_q);
        push_vec3(&mut fields, &r.fk_p);
        push_quat(&mut fields, &r.fk_q);
        push_vec3(&mut fields, &r.god_p);
        push_quat(&mut fields, &r.god_q);
        for vi in r.v {
            fields.push(vi.to_string());
        }
        push_vec3(&mut fields, &r.f_h);
        push_vec3(&mut fields, &r.tau_h);
        push_vec3(&mut fields, &r.u_c_force);
        push_vec3(&mut fields, &r.u_c_torque);
        fields.push(r.a.to_string());
        for s in r.a_sub {
            fields.push(s.to_string());
        }
        fields.push(r.a_ctrl.to_string());
        fields.push(r.f_gate.to_string());
        for d in [r.d_vp, r.d_vo, r.d_fp, r.d_fo] {
            fields.push(d.to_string());
        }
        fields.push(r.p_e_norm.to_string());
        fields.push(r.psi_e.to_string());
        fields.push(r.storage.to_string());
        fields.push(r.work_in.to_string());
        fields.push(r.bound.to_string());
        fields.push(
            match r.mode {
                Mode::ArmPriority => "arm",
                Mode::BasePriority => "base",
            }
            .to_string(),
        );
        fields.push(r.v_xy[0].to_string());
        fields.push(r.v_xy[1].to_string());
        fields.push(match r.min_leg_dist {
            Some(d) => d.to_string(),
            None => String::new(),
        });
        fields.push(r.xe_pos_norm.to_string());
        fields.push(r.xe_rot_norm.to_string());
        for b in [r.clamped, r.degenerate, r.repulsion_blocked] {
            fields.push(if b { "1" } else { "0" }.to_string());
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

struct FieldCursor<'a> {
    fields: Vec<&'a str>,
    idx: usize,
    line: usize,
}

impl<'a> FieldCursor<'a> {
    fn next_str(&mut self) -> Result<&'a str, SimError> {
        let f = self
            .fields
            .get(self.idx)
            .ok_or_else(|| SimError::Trace(format!("line {}: truncated row", self.line)))?;
        self.idx += 1;
        Ok(f)
    }

    fn next_f64(&mut self) -> Result<f64, SimError> {
        let line = self.line;
        let s = self.next_str()?;
        s.parse()
            .map_err(|e| SimError::Trace(format!("line {line}: bad float {s:?}: {e}")))
    }

    fn next_vec3(&mut self) -> Result<Vec3, SimError> {
        Ok(Vec3::new(
            self.next_f64()?,
            self.next_f64()?,
            self.next_f64()?,
        ))
    }

    fn next_quat(&mut self) -> Result<UnitQuat, SimError> {
        let w = self.next_f64()?;
        let v = self.next_vec3()?;
        // written from a unit quaternion; rebuild bit-exactly
        Ok(UnitQuat::from_parts_raw(w, v))
    }

    fn next_bool(&mut self) -> Result<bool, SimError> {
        Ok(self.next_f64()? != 0.0)
    }
}

/// Read a trace written by [`write_trace`].
pub fn read_trace<R: BufRead>(input: R) -> Result<TraceLog, SimError> {
    let mut lines = input.lines().enumerate();
    let (_, schema_line) = lines
        .next()
        .ok_or_else(|| SimError::Trace("empty file".into()))?;
    let schema_line = schema_line?;
    let rest = schema_line
        .strip_prefix(&format!("# {TRACE_SCHEMA} arm_dof="))
        .ok_or_else(|| SimError::Trace(format!("unrecognized schema line {schema_line:?}")))?;
    let arm_dof: usize = rest
        .trim()
        .parse()
        .map_err(|e| SimError::Trace(format!("bad arm_dof: {e}")))?;
    let (_, header) = lines
        .next()
        .ok_or_else(|| SimError::Trace("missing header row".into()))?;
    let header = header?;
    let expected = header_columns(arm_dof).join(",");
    if header != expected {
        return Err(SimError::Trace("header does not match schema".into()));
    }

    let mut records = Vec::new();
    for (lineno, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut c = FieldCursor {
            fields: line.split(',').collect(),
            idx: 0,
            line: lineno + 1,
        };
        let t_s = c.next_f64()?;
        let mut q = Vec::with_capacity(3 + arm_dof);
        for _ in 0..3 + arm_dof {
            q.push(c.next_f64()?);
        }
        let ee_p = c.next_vec3()?;
        let ee_q = c.next_quat()?;
        let fk_p = c.next_vec3()?;
        let fk_q = c.next_quat()?;
        let god_p = c.next_vec3()?;
        let god_q = c.next_quat()?;
        let mut v = [0.0; 6];
        for vi in &mut v {
            *vi = c.next_f64()?;
        }
        let f_h = c.next_vec3()?;
        let tau_h = c.next_vec3()?;
        let u_c_force = c.next_vec3()?;
        let u_c_torque = c.next_vec3()?;
        let a = c.next_f64()?;
        let mut a_sub = [0.0; 5];
        for s in &mut a_sub {
            *s = c.next_f64()?;
        }
        let a_ctrl = c.next_f64()?;
        let f_gate = c.next_f64()?;
        let d_vp = c.next_f64()?;
        let d_vo = c.next_f64()?;
        let d_fp = c.next_f64()?;
        let d_fo = c.next_f64()?;
        let p_e_norm = c.next_f64()?;
        let psi_e = c.next_f64()?;
        let storage = c.next_f64()?;
        let work_in = c.next_f64()?;
        let bound = c.next_f64()?;
        let mode = match c.next_str()? {
            "arm" => Mode::ArmPriority,
            "base" => Mode::BasePriority,
            other => {
                return Err(SimError::Trace(format!(
                    "line {}: bad mode {other:?}",
                    c.line
                )))
            }
        };
        let v_xy = [c.next_f64()?, c.next_f64()?];
        let leg_field = c.next_str()?;
        let min_leg_dist =
            if leg_field.is_empty() {
                None
            } else {
                Some(leg_field.parse().map_err(|e| {
                    SimError::Trace(format!("line {}: bad leg distance: {e}", c.line))
                })?)
            };
        let xe_pos_norm = c.next_f64()?;
        let xe_rot_norm = c.next_f64()?;
        let clamped = c.next_bool()?;
        let degenerate = c.next_bool()?;
        let repulsion_blocked = c.next_bool()?;
        if c.idx != c.fields.len() {
            return Err(SimError::Trace(format!("line {}: trailing fields", c.line)));
        }
        records.push(TraceRecord {
            t_s,
            q,
            ee_p,
            ee_q,
            fk_p,
            fk_q,
            god_p,
            god_q,
            v,
            f_h,
            tau_h,
            u_c_force,
            u_c_torque,
            a,
            a_sub,
            a_ctrl,
            f_gate,
            d_vp,
            d_vo,
            d_fp,
            d_fo,
            p_e_norm,
            psi_e,
            storage,
            work_in,
            bound,
            mode,
            v_xy,
            min_leg_dist,
            xe_pos_norm,
            xe_rot_norm,
            clamped,
            degenerate,
            repulsion_blocked,
        });
    }
    Ok(TraceLog { arm_dof, records })
}

/// Summary metrics over a trace: mean score, percentage of ticks at
/// `a = 0`, count of drops into `a = 0`, percentage of ticks with the leg
/// distance below `d_0`.
pub fn compute_metrics(trace: &TraceLog, d_0: f64) -> Result<MetricsSummary, SimError> {
    if trace.records.is_empty() {
        return Err(SimError::EmptyTrace);
    }
    let n = trace.records.len() as f64;
    let a_bar = trace.records.iter().map(|r| r.a).sum::<f64>() / n;
    let ne = trace.records.iter().filter(|r| r.a == 0.0).count() as f64;
    let mut beta = 0u64;
    for pair in trace.records.windows(2) {
        if pair[0].a > 0.0 && pair[1].a == 0.0 {
            beta += 1;
        }
    }
    let close = trace
        .records
        .iter()
        .filter(|r| matches!(r.min_leg_dist, Some(d) if d < d_0))
        .count() as f64;
    Ok(MetricsSummary {
        a_bar,
        zeta_ne_percent: 100.0 * ne / n,
        beta,
        zeta_d_percent: 100.0 * close / n,
    })
}

/// Scalar quantities addressable by [`emit_plot_data`]: any scalar trace
/// column plus the derived `u_c_norm`, `f_h_norm` and `V_minus_bound`.
pub fn scalar_quantity(r: &TraceRecord, name: &str) -> Option<f64> {
    Some(match name {
        "a" => r.a,
        "a_abduction" => r.a_sub[0],
        "a_flexion" => r.a_sub[1],
        "a_rotation" => r.a_sub[2],
        "a_elbow" => r.a_sub[3],
        "a_bending" => r.a_sub[4],
        "a_ctrl" => r.a_ctrl,
        "f" => r.f_gate,
        "d_vp" => r.d_vp,
        "d_vo" => r.d_vo,
        "d_fp" => r.d_fp,
        "d_fo" => r.d_fo,
        "p_e_norm_m" => r.p_e_norm,
        "psi_e" => r.psi_e,
        "storage_j" => r.storage,
        "work_in_j" => r.work_in,
        "bound_j" => r.bound,
        "V_minus_bound" => r.storage - r.bound,
        "u_c_norm" => (r.u_c_force.norm_squared() + r.u_c_torque.norm_squared()).sqrt(),
        "f_h_norm" => r.f_h.norm(),
        "tau_h_norm" => r.tau_h.norm(),
        "v_xy_norm" => (r.v_xy[0] * r.v_xy[0] + r.v_xy[1] * r.v_xy[1]).sqrt(),
        "min_leg_dist_m" => r.min_leg_dist?,
        "xe_pos_norm_m" => r.xe_pos_norm,
        "xe_rot_norm" => r.xe_rot_norm,
        "mode" => match r.mode {
            Mode::ArmPriority => 0.0,
            Mode::BasePriority => 1.0,
        },
        _ => return None,
    })
}

/// Emit `(t, value)` rows for one named quantity. Ticks where the quantity
/// is undefined (e.g. no legs scripted) are skipped.
pub fn emit_plot_data<W: Write>(
    trace: &TraceLog,
    quantity: &str,
    mut out: W,
) -> Result<(), SimError> {
    if !trace.records.is_empty() && scalar_quantity(&trace.records[0], quantity).is_none() {
        // probe emptiness-insensitive: check against any record
        if trace
            .records
            .iter()
            .all(|r| scalar_quantity(r, quantity).is_none())
        {
            return Err(SimError::UnknownQuantity(quantity.to_string()));
        }
    }
    writeln!(out, "t_s,{quantity}")?;
    for r in &trace.records {
        if let Some(v) = scalar_quantity(r, quantity) {
            writeln!(out, "{},{v}", r.t_s)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, a: f64, leg: Option<f64>) -> TraceRecord {
        TraceRecord {
            t_s: t,
            q: vec![0.1, -0.2, 0.05, 0.0, 0.3, -0.7, 1.1, 0.0, 0.2],
            ee_p: Vec3::new(1.0, 2.0, 3.0),
            ee_q: UnitQuat::from_axis_angle(Vec3::z(), 0.3),
            fk_p: Vec3::new(1.0, 2.0, 3.0),
            fk_q: UnitQuat::identity(),
            god_p: Vec3::new(0.9, 2.0, 3.0),
            god_q: UnitQuat::identity(),
            v: [0.1, 0.0, -0.2, 0.0, 0.0, 0.3],
            f_h: Vec3::new(5.0, 0.0, 0.0),
            tau_h: Vec3::zeros(),
            u_c_force: Vec3::new(-3.0, 0.0, 0.0),
            u_c_torque: Vec3::zeros(),
            a,
            a_sub: [1.0, 1.0, 1.0, a, 1.0],
            a_ctrl: a,
            f_gate: 0.5,
            d_vp: 20.0,
            d_vo: 4.0,
            d_fp: 0.0,
            d_fo: 0.0,
            p_e_norm: 0.1,
            psi_e: 0.001,
            storage: 1.5,
            work_in: 2.0,
            bound: 100.0,
            mode: Mode::ArmPriority,
            v_xy: [0.0, -0.05],
            min_leg_dist: leg,
            xe_pos_norm: 1e-4,
            xe_rot_norm: 1e-5,
            clamped: false,
            degenerate: false,
            repulsion_blocked: false,
        }
    }

    fn sample_log() -> TraceLog {
        TraceLog {
            arm_dof: 6,
            records: vec![
                record(0.0, 1.0, None),
                record(0.001, 1.0, Some(0.2)),
                record(0.002, 0.0, Some(0.05)),
                record(0.003, 0.0, Some(0.05)),
                record(0.004, 1.0, Some(0.2)),
                record(0.005, 0.0, None),
            ],
        }
    }

    #[test]
    fn round_trip_is_identical() {
        let log = sample_log();
        let mut buf = Vec::new();
        write_trace(&log, &mut buf).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(log, back);
        // serialization is deterministic byte for byte
        let mut buf2 = Vec::new();
        write_trace(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn metrics_match_hand_counts() {
        let log = sample_log();
        let m = compute_metrics(&log, 0.10).unwrap();
        // a sequence 1,1,0,0,1,0: two drops into zero, half the ticks at zero
        assert_eq!(m.beta, 2);
        assert!((m.zeta_ne_percent - 50.0).abs() < 1e-12);
        assert!((m.a_bar - 0.5).abs() < 1e-12);
        // legs below 0.10 in 2 of 6 ticks
        assert!((m.zeta_d_percent - 100.0 * 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_reject_empty_trace() {
        let log = TraceLog {
            arm_dof: 6,
            records: vec![],
        };
        assert!(matches!(
            compute_metrics(&log, 0.1),
            Err(SimError::EmptyTrace)
        ));
    }

    #[test]
    fn metrics_invariant_under_reserialization() {
        let log = sample_log();
        let mut buf = Vec::new();
        write_trace(&log, &mut buf).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(
            compute_metrics(&log, 0.1).unwrap(),
            compute_metrics(&back, 0.1).unwrap()
        );
    }

    #[test]
    fn plot_data_emits_known_quantities() {
        let log = sample_log();
        let mut buf = Vec::new();
        emit_plot_data(&log, "f", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t_s,f");
        for line in lines {
            let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }

        let mut buf = Vec::new();
        emit_plot_data(&log, "V_minus_bound", &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().lines().count() == 7);

        let err = emit_plot_data(&log, "warp_factor", &mut Vec::new()).unwrap_err();
        assert!(matches!(err, SimError::UnknownQuantity(_)));
    }

    #[test]
    fn corrupted_rows_are_reported_with_line_numbers() {
        let log = sample_log();
        let mut buf = Vec::new();
        write_trace(&log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("0.002", "zebra");
        let err = read_trace(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }
}
