use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;

use sectorlab::cuntz::parse::parse_expression;
use sectorlab::cuntz::PolynomialJson;

use crate::io::{read_json, CliError, CliResult, Report, Table};
use crate::schema::CuntzFile;

#[derive(Debug, Subcommand)]
pub enum CuntzCommand {
    /// Reduce expressions in the Cuntz generators to normal form
    Nf(NfArgs),
}

#[derive(Debug, Args)]
pub struct NfArgs {
    /// Number of generators
    #[arg(long)]
    pub d: Option<usize>,

    /// Expression such as "s1* s2 s2* s1"; may be repeated
    #[arg(long = "expr")]
    pub exprs: Vec<String>,

    /// File listing expressions
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Serialize)]
struct NormalForm {
    input: String,
    normal_form: String,
    polynomial: PolynomialJson,
}

#[derive(Serialize)]
struct NfReport {
    d: usize,
    results: Vec<NormalForm>,
}

pub fn run(cmd: &CuntzCommand) -> CliResult<Report> {
    match cmd {
        CuntzCommand::Nf(args) => normal_forms(args),
    }
}

fn normal_forms(args: &NfArgs) -> CliResult<Report> {
    let mut exprs = Vec::new();
    let mut d = args.d;
    if let Some(path) = &args.file {
        let file: CuntzFile = read_json(path)?;
        if let Some(given) = d.filter(|&g| g != file.d) {
            return Err(CliError::Usage(format!("--d {given} disagrees with d = {} in {}", file.d, path.display())));
        }
        d = Some(file.d);
        exprs.extend(file.expressions);
    }
    exprs.extend(args.exprs.iter().cloned());
    let d = d.ok_or_else(|| CliError::Usage("the number of generators is required (--d or a file)".into()))?;
    if exprs.is_empty() {
        return Err(CliError::Usage("no expression given (use --expr or --file)".into()));
    }

    let results = exprs
        .into_iter()
        .map(|src| {
            let p = parse_expression(&src, d).map_err(|e| CliError::Usage(format!("`{src}`: {e}")))?;
            Ok(NormalForm {
                normal_form: p.to_string(),
                polynomial: p.to_json(),
                input: src,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut text = String::new();
    let mut table = Table::new(&["input", "normal_form"]);
    for r in &results {
        if results.len() == 1 {
            writeln!(text, "{}", r.normal_form).unwrap();
        } else {
            writeln!(text, "{} = {}", r.input, r.normal_form).unwrap();
        }
        table.push(vec![r.input.clone(), r.normal_form.clone()]);
    }
    Ok(Report::new(&NfReport { d, results }, text, table, true))
}
