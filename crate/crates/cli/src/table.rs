//! Plain-text rendering of reports.

use std::fmt::Write;

use crate::commands::Body;
use crate::report::*;

fn grid(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    out += &line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

fn leakage(r: &LeakageReport) -> String {
    let with_gain = r.outputs.iter().any(|o| o.g_leakage.is_some());
    let mut header = vec!["output", "P(y)", "exp(ℓ)", "ℓ (nats)"];
    if with_gain {
        header.push("g-leakage");
    }
    let rows: Vec<Vec<String>> = r
        .outputs
        .iter()
        .map(|o| {
            let mut row = vec![
                o.output.clone(),
                o.mass.clone(),
                o.leakage.ratio.clone(),
                o.leakage.nats.map_or("inf".into(), |n| format!("{n:.6}")),
            ];
            if let Some(g) = &o.g_leakage {
                row.push(g.show());
            }
            row
        })
        .collect();
    let mut out = grid(&header, &rows);
    if !r.unsupported.is_empty() {
        let _ = writeln!(out, "zero-mass outputs: {}", r.unsupported.join(", "));
    }
    let _ = writeln!(out, "max PML:          {}", r.max.show());
    let _ = writeln!(out, "maximal leakage:  {}", r.maximal_leakage.show());
    let _ = writeln!(out, "E[ℓ] (nats):      {:.6}", r.expected_leakage_nats);
    out
}

fn guarantee(g: &GuaranteeDto) -> String {
    let mut out = format!(
        "{} at (ε ratio {}, δ {}): {}\n  smallest ε at this δ: {}\n  witness: {}\n",
        g.kind,
        g.epsilon.ratio,
        g.delta,
        if g.holds { "holds" } else { "fails" },
        g.level.show(),
        g.witness.show()
    );
    if let Some(d) = &g.diagnostic {
        let _ = writeln!(out, "  {d}");
    }
    out
}

fn eml(r: &EmlReport) -> String {
    let mut out = format!("δ = {}\nκ = {}\n", r.delta, r.kappa.show());
    let rows: Vec<Vec<String>> = r.h.iter().map(|h| vec![h.input.clone(), h.value.show()]).collect();
    out += &grid(&["input", "h_x(δ)"], &rows);
    let _ = writeln!(out, "worst event: {}", r.worst_event.show());
    if let Some(g) = &r.guarantee {
        out += &guarantee(g);
    }
    out
}

fn measures(ms: &[MeasureReportDto]) -> String {
    let rows: Vec<Vec<String>> = ms
        .iter()
        .map(|m| {
            let bounds: Vec<String> = m.bounds.iter().map(|(k, v)| format!("{k}={v}")).collect();
            vec![
                m.measure.clone(),
                m.value.clone(),
                m.nats.map_or(String::new(), |n| format!("{n:.6}")),
                m.implied_pml_bound.as_ref().map_or(String::new(), Ratio::show),
                bounds.join(" "),
            ]
        })
        .collect();
    let mut out = grid(&["measure", "value", "nats", "implied PML bound", "bounds"], &rows);
    for m in ms {
        if let Some(n) = &m.note {
            let _ = writeln!(out, "{}: {n}", m.measure);
        }
    }
    out
}

pub fn render(body: &Body) -> String {
    match body {
        Body::Pml(r) => leakage(r),
        Body::Eml(r) => eml(r),
        Body::Guarantee(set) => {
            let mut out: String = set.reports.iter().map(guarantee).collect();
            if let Some(c) = &set.eml_to_pml {
                let _ = writeln!(out, "EML to PML: {}", c.diagnostic);
            }
            out
        }
        Body::Reduce(r) => {
            let rows: Vec<Vec<String>> = r
                .classes
                .iter()
                .map(|c| vec![c.output.clone(), c.members.join(", ")])
                .collect();
            let mut out = grid(&["class", "members"], &rows);
            if !r.dropped.is_empty() {
                let _ = writeln!(out, "dropped: {}", r.dropped.join(", "));
            }
            out
        }
        Body::Compose(r) => {
            let mut out = format!("composed outputs: {}\n", r.outputs);
            out += &leakage(&r.leakage);
            let rows: Vec<Vec<String>> = r
                .rules
                .iter()
                .map(|x| {
                    vec![
                        x.rule.clone(),
                        x.first.show(),
                        x.second.show(),
                        x.bound.show(),
                        x.achieved.ratio.clone(),
                        if x.holds { "yes" } else { "no" }.into(),
                    ]
                })
                .collect();
            out += "\n";
            out += &grid(&["rule", "first", "second", "bound", "achieved", "holds"], &rows);
            out
        }
        Body::Compare(ms) => measures(ms),
        Body::Audit(a) => {
            let mut out = format!("model sha256: {}\n\n", a.model_digest);
            out += &leakage(&a.leakage);
            out += "\n";
            let rows: Vec<Vec<String>> = a
                .levels
                .iter()
                .map(|l| vec![l.delta.clone(), l.delta_pml.show(), l.eml.show()])
                .collect();
            out += &grid(&["δ", "(ε,δ)-PML level", "(ε,δ)-EML level"], &rows);
            for g in &a.guarantees {
                out += "\n";
                out += &guarantee(g);
            }
            out += "\n";
            out += &measures(&a.measures);
            if let Some(t) = a.timing_ms {
                let _ = writeln!(out, "elapsed: {t:.1} ms");
            }
            out
        }
    }
}
