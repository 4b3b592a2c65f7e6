use std::fs;
use std::time::Instant;

use serde_json::json;
use structag::elman::ElmanGrammar;

use crate::args::GenerateArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

pub fn run(args: &GenerateArgs) -> CliResult<()> {
    if args.sentences == 0 {
        return Err(CliError::Input("--sentences must be at least 1".into()));
    }
    let start = Instant::now();
    let sentences = ElmanGrammar::new().generate(args.sentences, args.seed)?;
    let mut text = String::new();
    for s in &sentences {
        text.push_str(&s.join(" "));
        text.push('\n');
    }
    fs::write(&args.out, text).map_err(|e| CliError::io(&args.out, e))?;
    let mut manifest = RunManifest::new(
        "generate-elman",
        json!({ "sentences": args.sentences, "seed": args.seed, "out": args.out }),
    );
    manifest.time("generate", start.elapsed());
    manifest.write_beside(&args.out)?;
    Ok(())
}
