//! CSV tables. Reals are written with 17 significant digits so every value
//! round-trips exactly.

use dynbound_core::lyapunov::LyapunovResult;
use dynbound_core::{SectionPoint, Trajectory};

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn table(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// `t,<var1>,...,<varn>`
pub fn trajectory_csv(tr: &Trajectory, names: &[String]) -> String {
    let header = std::iter::once("t".to_string()).chain(names.iter().cloned()).collect();
    table(header, tr.samples().iter().map(|s| std::iter::once(s.t).chain(s.state.iter().copied()).map(real).collect()))
}

/// `iterate,u,v,t`
pub fn section_csv(points: &[SectionPoint]) -> String {
    table(
        ["iterate", "u", "v", "t"].map(String::from).to_vec(),
        points.iter().enumerate().map(|(i, p)| vec![i.to_string(), real(p.coords[0]), real(p.coords[1]), real(p.time)]),
    )
}

/// `t,x,y,z` samples of one period.
pub fn orbit_csv(samples: &[(f64, [f64; 3])], names: &[String]) -> String {
    let header = std::iter::once("t".to_string()).chain(names.iter().cloned()).collect();
    table(header, samples.iter().map(|(t, x)| std::iter::once(*t).chain(x.iter().copied()).map(real).collect()))
}

/// `time,lambda1,...,lambdan`
pub fn lyapunov_history_csv(r: &LyapunovResult) -> String {
    let n = r.exponents.len();
    let header = std::iter::once("time".to_string()).chain((1..=n).map(|i| format!("lambda{i}"))).collect();
    table(
        header,
        r.convergence_history.iter().map(|(t, l)| std::iter::once(*t).chain(l.iter().copied()).map(real).collect()),
    )
}
