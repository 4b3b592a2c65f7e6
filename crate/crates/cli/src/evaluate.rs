use std::fs;
use std::time::Instant;

use serde_json::json;
use structag::elman::{evaluate_with_threshold, ErrorLabel, EvalReport, GoldReference};

use crate::args::{EvaluateArgs, ExportGoldArgs};
use crate::cluster::read_tags;
use crate::error::{CliError, CliResult};
use crate::format::{csv_writer, real};
use crate::manifest::{InputDigest, RunManifest};
use crate::Outcome;

pub const BUILTIN_GOLD: &str = "builtin-elman";

pub fn load_gold(source: &str) -> CliResult<GoldReference> {
    if source == BUILTIN_GOLD {
        return Ok(GoldReference::elman());
    }
    let text = fs::read_to_string(source).map_err(|e| CliError::io(source, e))?;
    GoldReference::from_tsv(&text).map_err(|e| CliError::Input(format!("{source}: {e}")))
}

pub fn render(report: &EvalReport) -> String {
    let mut out = format!(
        "level1_separation: {}\ndendrogram_purity: {}\n",
        report.level1_separation,
        real(report.dendrogram_purity)
    );
    for (group, p) in &report.per_group_purity {
        out.push_str(&format!("  {group}: {}\n", real(*p)));
    }
    out.push_str(&format!("error_label: {}\n", report.error_label));
    out
}

pub fn run(args: &EvaluateArgs) -> CliResult<Outcome> {
    let start = Instant::now();
    let tags = read_tags(&args.tags)?;
    let gold = load_gold(&args.gold)?;
    let report = evaluate_with_threshold(&tags, &gold, args.threshold)?;

    print!("{}", render(&report));
    println!("level1_separation,dendrogram_purity,error_label");
    println!(
        "{},{},{}",
        report.level1_separation,
        real(report.dendrogram_purity),
        report.error_label
    );

    if let Some(path) = &args.report {
        let mut w = csv_writer(path)?;
        let mut header = vec!["level1_separation".to_owned(), "dendrogram_purity".into(), "error_label".into()];
        header.extend(report.per_group_purity.iter().map(|(g, _)| format!("purity_{g}")));
        w.write_record(&header)?;
        let mut row = vec![
            report.level1_separation.to_string(),
            real(report.dendrogram_purity),
            report.error_label.to_string(),
        ];
        row.extend(report.per_group_purity.iter().map(|(_, p)| real(*p)));
        w.write_record(&row)?;
        w.flush().map_err(|e| CliError::io(path, e))?;

        let mut manifest = RunManifest::new(
            "evaluate",
            json!({ "tags": args.tags, "gold": args.gold, "threshold": args.threshold }),
        );
        let bytes = fs::read(&args.tags).map_err(|e| CliError::io(&args.tags, e))?;
        manifest.inputs.push(InputDigest::of(&args.tags, &bytes));
        manifest.time("evaluate", start.elapsed());
        manifest.write_beside(path)?;
    }

    Ok(match report.error_label {
        ErrorLabel::None | ErrorLabel::Low => Outcome::Success,
        ErrorLabel::Medium | ErrorLabel::High => Outcome::GateFailed,
    })
}

pub fn export_gold(args: &ExportGoldArgs) -> CliResult<()> {
    let start = Instant::now();
    fs::write(&args.out, GoldReference::elman().to_tsv()).map_err(|e| CliError::io(&args.out, e))?;
    let mut manifest = RunManifest::new("export-gold", json!({ "out": args.out }));
    manifest.time("export", start.elapsed());
    manifest.write_beside(&args.out)?;
    Ok(())
}
