use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;
use crate::output::Artifacts;
use crate::record::{read_all, RunRecord, RUN_LOG};

pub const REPORT_FILE: &str = "report.md";

/// Stages the report draws on, with the artifact each section reads.
const STAGES: [(&str, &str); 3] = [
    ("sensitivity", "sensitivity.json"),
    ("ld-study", "ld_study_summary.json"),
    ("scale-opt", "scale_opt_result.json"),
];

fn fixed(v: &Value, digits: usize) -> String {
    v.as_f64().map_or_else(|| "n/a".into(), |x| format!("{x:.digits$}"))
}

fn sci(v: &Value) -> String {
    v.as_f64().map_or_else(|| "n/a".into(), |x| format!("{x:.4e}"))
}

fn text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "n/a".into(),
        other => other.to_string(),
    }
}

fn short_hash(r: &RunRecord) -> String {
    r.config_hash
        .as_deref()
        .map_or_else(|| "-".into(), |h| h[..12.min(h.len())].to_string())
}

fn sensitivity_section(out: &mut String, doc: &Value, rec: &RunRecord) {
    let qmc = &doc["qmc"];
    let names: Vec<String> = doc["parameters"]
        .as_array()
        .map(|a| a.iter().map(text).collect())
        .unwrap_or_default();
    let surrogates = doc["surrogates"].as_array().cloned().unwrap_or_default();
    let _ = writeln!(
        out,
        "Model `{}`, base N {}, {} evaluations ({} failed), config `{}`.\n",
        text(&doc["model"]),
        text(&doc["base_n"]),
        text(&doc["total_evaluations"]),
        text(&doc["failed_evaluations"]),
        short_hash(rec)
    );
    let mut header = String::from("| rank | parameter | S1 | ST |");
    let mut rule = String::from("|---:|---|---:|---:|");
    for s in &surrogates {
        let _ = write!(header, " ST {} |", text(&s["label"]));
        rule.push_str("---:|");
    }
    header.push_str(" critical |");
    rule.push_str("---|");
    let _ = writeln!(out, "{header}\n{rule}");
    let critical: Vec<String> = doc["ranking"]["critical"]
        .as_array()
        .map(|a| a.iter().map(text).collect())
        .unwrap_or_default();
    let order: Vec<String> = doc["ranking"]["order"]
        .as_array()
        .map(|a| a.iter().map(text).collect())
        .unwrap_or_default();
    for (rank, name) in order.iter().enumerate() {
        let Some(i) = names.iter().position(|n| n == name) else {
            continue;
        };
        let _ = write!(
            out,
            "| {} | {} | {} | {} |",
            rank + 1,
            name,
            fixed(&qmc["s1"][i], 4),
            fixed(&qmc["st"][i], 4)
        );
        for s in &surrogates {
            let _ = write!(out, " {} |", fixed(&s["result"]["st"][i], 4));
        }
        let _ = writeln!(out, " {} |", if critical.contains(name) { "yes" } else { "" });
    }
    let _ = writeln!(
        out,
        "\nCritical uncertainties (ST >= {}): {}.",
        text(&doc["ranking"]["threshold"]),
        if critical.is_empty() {
            "none".into()
        } else {
            critical.join(", ")
        }
    );
    for s in &surrogates {
        let low = s["result"]["low_confidence"].as_bool().unwrap_or(false);
        let _ = writeln!(
            out,
            "Surrogate `{}`: {} training rows, r² {}{}.",
            text(&s["label"]),
            text(&s["train_rows"]),
            fixed(&s["fit"]["r_squared"], 6),
            if low { ", low confidence" } else { "" }
        );
    }
}

fn study_section(out: &mut String, doc: &Value, rec: &RunRecord) {
    let _ = writeln!(
        out,
        "{} shared rows over ({}), config `{}`.\n",
        text(&doc["shared_rows"]),
        doc["columns"]
            .as_array()
            .map(|a| a.iter().map(text).collect::<Vec<_>>().join(", "))
            .unwrap_or_default(),
        short_hash(rec)
    );
    let _ = writeln!(
        out,
        "| structure | mean L/D | std L/D | mean runtime (s) | failures |\n|---|---:|---:|---:|---:|"
    );
    for s in doc["summary"].as_array().into_iter().flatten() {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            text(&s["structure"]),
            fixed(&s["mean_l_over_d"], 4),
            fixed(&s["std_l_over_d"], 4),
            sci(&s["mean_runtime"]),
            text(&s["failures"])
        );
    }
}

fn scaling_section(out: &mut String, doc: &Value, rec: &RunRecord) {
    let x = &doc["x"];
    let active: Vec<String> = doc["active_set"]
        .as_array()
        .map(|a| a.iter().map(text).collect())
        .unwrap_or_default();
    let _ = writeln!(
        out,
        "Full-scale `{}` at Ma {}, α {}°, h {} m; config `{}`.\n",
        text(&doc["structure"]),
        text(&doc["full_scale_condition"]["mach"]),
        text(&doc["full_scale_condition"]["alpha"]),
        text(&doc["full_scale_condition"]["altitude"]),
        short_hash(rec)
    );
    let _ = writeln!(out, "| variable | optimum | active bound |\n|---|---:|---|");
    for (name, key, digits) in [
        ("n", "n", 4),
        ("α (deg)", "alpha", 4),
        ("Ma", "mach", 4),
        ("h (m)", "altitude", 1),
    ] {
        let b: Vec<&String> = active.iter().filter(|c| c.split(' ').next() == Some(key)).collect();
        let _ = writeln!(
            out,
            "| {name} | {} | {} |",
            fixed(&x[key], digits),
            b.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        );
    }
    let e: Vec<&String> = active.iter().filter(|c| c.starts_with("young_modulus")).collect();
    let _ = writeln!(
        out,
        "| E (Pa) | {} | {} |",
        sci(&x["young_modulus"]),
        e.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
    );
    let c = &doc["cost"];
    let _ = writeln!(
        out,
        "\nCost {} (L/D {}, Re {}, Ma {}), start {}; {} after {} iterations.\n",
        fixed(&c["total"], 6),
        fixed(&c["ld_term"], 6),
        fixed(&c["re_term"], 6),
        fixed(&c["ma_term"], 6),
        fixed(&doc["start_cost"]["total"], 6),
        text(&doc["termination"]),
        text(&doc["iterations"])
    );
    let _ = writeln!(out, "| group | full scale | sub scale | ratio |\n|---|---:|---:|---:|");
    for g in doc["similitude"]["groups"].as_array().into_iter().flatten() {
        let flag = if g["flagged"].as_bool().unwrap_or(false) {
            " (!)"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {}{flag} |",
            text(&g["name"]),
            sci(&g["full"]),
            sci(&g["sub"]),
            fixed(&g["ratio"], 4)
        );
    }
    let _ = writeln!(out, "\nMass scale n_mass = {}.", sci(&doc["similitude"]["mass_scale"]));
}

/// Latest successful record per stage, newest last in the log.
fn latest<'a>(records: &'a [RunRecord], command: &str) -> Option<&'a RunRecord> {
    records.iter().rev().find(|r| r.command == command && r.status == "ok")
}

pub fn build(dir: &Path) -> Result<String, CliError> {
    let records = read_all(dir)?;
    if records.is_empty() {
        return Err(CliError::MissingArtifacts(vec![dir
            .join(RUN_LOG)
            .display()
            .to_string()]));
    }
    let mut missing = Vec::new();
    let mut docs = Vec::new();
    for (stage, file) in STAGES {
        let Some(rec) = latest(&records, stage) else {
            docs.push(None);
            continue;
        };
        for m in &rec.manifest {
            if !dir.join(m).is_file() {
                missing.push(m.clone());
            }
        }
        match std::fs::read_to_string(dir.join(file)) {
            Ok(t) => docs.push(Some((serde_json::from_str::<Value>(&t)?, rec))),
            Err(_) => {
                if !missing.contains(&file.to_string()) {
                    missing.push(file.to_string());
                }
                docs.push(None);
            }
        }
    }
    if !missing.is_empty() {
        return Err(CliError::MissingArtifacts(missing));
    }
    if docs.iter().all(Option::is_none) {
        return Err(CliError::MissingArtifacts(
            STAGES.iter().map(|s| s.1.to_string()).collect(),
        ));
    }

    let mut out = String::from("# Uncertainty mitigation report\n");
    let sections: [(&str, fn(&mut String, &Value, &RunRecord)); 3] = [
        ("Critical uncertainties", sensitivity_section),
        ("L/D variability across model structures", study_section),
        ("Scaled experiment conditions", scaling_section),
    ];
    for ((title, render), doc) in sections.iter().zip(&docs) {
        let _ = writeln!(out, "\n## {title}\n");
        match doc {
            Some((v, rec)) => render(&mut out, v, rec),
            None => out.push_str("No successful run recorded.\n"),
        }
    }
    Ok(out)
}

pub fn run(art: &mut Artifacts) -> Result<(), CliError> {
    let body = build(art.dir())?;
    art.text(REPORT_FILE, &body)
}
