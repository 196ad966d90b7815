use std::io::Write;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use classweave_core::indexes;
use classweave_core::notation::ROOT_LABEL;
use classweave_core::render::{aligned, browse_table, hit_table};
use serde::Serialize;

use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::http::{self, split_assignment, synthesis_request};
use crate::service::Service;

#[derive(Debug, Parser)]
#[command(
    name = "classweave",
    version,
    about = "Classification scheme toolkit and subject search service"
)]
pub struct Cli {
    /// Config file; defaults to $CLASSWEAVE_CONFIG, then ./classweave.toml.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Structured output instead of tables and text formats.
    #[arg(long, global = true)]
    pub json: bool,
    /// Scheme id; defaults to the first configured scheme.
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// Caption language; defaults to the configured language.
    #[arg(long, global = true)]
    pub lang: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load every configured source and report diagnostics.
    Validate,
    /// List loaded schemes.
    Schemes,
    /// One class with its breadcrumbs, children and see-also targets.
    Show { notation: String },
    /// Classes matching a term, with their context rows and hit counts.
    Search {
        #[arg(required = true, num_args = 1..)]
        term: Vec<String>,
        #[arg(long)]
        aggregate: bool,
    },
    /// A class and its children; the root when no notation is given.
    Browse {
        notation: Option<String>,
        #[arg(long)]
        aggregate: bool,
    },
    /// Broaden a number until it retrieves enough documents.
    Broaden {
        notation: String,
        #[arg(long)]
        min_hits: Option<usize>,
    },
    /// Documents filed at a class or anywhere below it.
    Explode { notation: String },
    /// See-also targets of a class.
    Related { notation: String },
    /// Build a number from a main class and auxiliaries, or from a facet formula.
    Synthesize {
        #[arg(long, conflicts_with = "formula", required_unless_present = "formula")]
        main: Option<String>,
        #[arg(long)]
        formula: Option<String>,
        /// facet=value for auxiliaries, slot=value for formulas; repeatable.
        #[arg(long = "aux")]
        aux: Vec<String>,
    },
    /// Apply an add-to-base instruction.
    ExpandAdd {
        #[arg(long)]
        base: String,
        #[arg(long)]
        source: String,
    },
    /// Chain index as tab-separated lines.
    ChainIndex,
    /// Relative index as tab-separated lines.
    RelativeIndex,
    /// Concept export as sorted N-Triples.
    ExportSkos,
    /// Multilingual authority records.
    Authority {
        #[arg(required = true, num_args = 1..)]
        notations: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        langs: Vec<String>,
    },
    /// Translate a notation through the concordance.
    Map {
        source_scheme: String,
        notation: String,
        #[arg(long)]
        to: String,
    },
    /// Rank classes for a piece of free text.
    Suggest {
        #[arg(long)]
        text: String,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
        host: IpAddr,
    },
}

/// Parses `argv` (program name first) and runs it. Returns the exit status:
/// 0 on success, 1 on data errors, 2 on usage errors.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = if cli.json {
                writeln!(
                    err,
                    "{}",
                    serde_json::to_string(&e.body()).expect("error body serializes")
                )
            } else {
                writeln!(err, "error: {e}")
            };
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, ServiceError> {
    let config = ServiceConfig::load(&ServiceConfig::locate(cli.config.as_deref()))?;
    let service = Service::load(config)?;
    if !matches!(cli.command, Command::Validate) {
        for d in service.diagnostics() {
            let _ = writeln!(err, "warning: {d}");
        }
    }
    let scheme = cli.scheme.as_deref();
    let lang = cli.lang.as_deref();
    let mut emit = Emitter { json: cli.json, out };
    match &cli.command {
        Command::Validate => {
            let report = service.validate();
            emit.value(&report, |w| {
                for s in &report.schemes {
                    writeln!(w, "{}\t{} classes\t{}", s.id, s.classes, s.path)?;
                }
                writeln!(w, "documents\t{}", report.documents)?;
                writeln!(w, "mappings\t{}", report.concordance_entries)?;
                for d in &report.diagnostics {
                    writeln!(w, "{d}")?;
                }
                writeln!(
                    w,
                    "{}",
                    if report.ok {
                        "ok".to_string()
                    } else {
                        format!("{} diagnostics", report.diagnostics.len())
                    }
                )
            })?;
            return Ok(if report.ok { 0 } else { 1 });
        }
        Command::Schemes => {
            let list = service.schemes();
            emit.value(&list, |w| {
                let rows: Vec<Vec<String>> = list
                    .schemes
                    .iter()
                    .map(|s| {
                        vec![
                            s.id.clone(),
                            s.mode.as_str().to_string(),
                            s.classes.to_string(),
                            s.languages.join(","),
                            s.title.clone(),
                        ]
                    })
                    .collect();
                write!(
                    w,
                    "{}",
                    aligned(&["Scheme", "Mode", "Classes", "Languages", "Title"], &rows)
                )
            })?;
        }
        Command::Show { notation } => {
            let view = service.class(scheme, notation, lang)?;
            emit.value(&view, |w| {
                writeln!(w, "{}  {}", view.notation, view.caption)?;
                if !view.breadcrumbs.is_empty() {
                    let trail: Vec<String> = view
                        .breadcrumbs
                        .iter()
                        .map(|c| format!("{} {}", c.notation, c.caption))
                        .collect();
                    writeln!(w, "Path: {}", trail.join(" > "))?;
                }
                writeln!(
                    w,
                    "Hits: {} direct, {} aggregate",
                    view.direct_hits, view.aggregate_hits
                )?;
                if !view.children.is_empty() {
                    let rows: Vec<Vec<String>> = view
                        .children
                        .iter()
                        .map(|c| vec![c.notation.canonical(), c.caption.clone(), c.direct_hits.to_string()])
                        .collect();
                    write!(w, "{}", aligned(&["Narrower", "Caption", "Hits"], &rows))?;
                }
                for sa in &view.see_also {
                    writeln!(w, "See also: {} {}", sa.notation, sa.caption)?;
                }
                Ok(())
            })?;
        }
        Command::Search { term, aggregate } => {
            let result = service.search(scheme, &term.join(" "), lang)?;
            emit.value(&result, |w| {
                write!(w, "{}", hit_table(&result.query, &result.rows, *aggregate))
            })?;
        }
        Command::Browse { notation, aggregate } => {
            let view = service.browse(scheme, notation.as_deref(), *aggregate, lang)?;
            emit.value(&view, |w| write!(w, "{}", browse_table(&view)))?;
        }
        Command::Broaden { notation, min_hits } => {
            let result = service.broaden(scheme, notation, *min_hits, lang)?;
            emit.value(&result, |w| {
                let reached = &result.reached;
                let at = reached
                    .notation
                    .as_ref()
                    .map_or(ROOT_LABEL.to_string(), |n| n.canonical());
                let label = if reached.notation.is_some() {
                    format!("  {}", reached.label)
                } else {
                    String::new()
                };
                writeln!(w, "{at}{label}\t{} hits\t{} steps", reached.hits, reached.steps)
            })?;
        }
        Command::Explode { notation } => {
            let result = service.explode(scheme, Some(notation))?;
            emit.value(&result, |w| {
                let rows: Vec<Vec<String>> = result
                    .documents
                    .iter()
                    .map(|d| {
                        let marks: Vec<String> = d.classmarks.iter().map(|m| m.canonical()).collect();
                        vec![d.doc_id.clone(), marks.join(";"), d.title.clone()]
                    })
                    .collect();
                writeln!(w, "{} documents", result.count)?;
                write!(w, "{}", aligned(&["Document", "Classmarks", "Title"], &rows))
            })?;
        }
        Command::Related { notation } => {
            let result = service.related(scheme, notation, lang)?;
            emit.value(&result, |w| {
                let rows: Vec<Vec<String>> = result
                    .rows
                    .iter()
                    .map(|r| vec![r.notation.canonical(), r.caption.clone(), r.direct_hits.to_string()])
                    .collect();
                write!(w, "{}", aligned(&["Notation", "Caption", "Hits"], &rows))
            })?;
        }
        Command::Synthesize { main, formula, aux } => {
            let aux = aux.iter().map(|a| split_assignment(a)).collect::<Result<Vec<_>, _>>()?;
            let request = synthesis_request(main.as_deref(), formula.as_deref(), &aux)?;
            let result = service.synthesize(scheme, &request)?;
            emit.value(&result, |w| writeln!(w, "{}", result.notation))?;
        }
        Command::ExpandAdd { base, source } => {
            let result = service.expand_add(scheme, base, source)?;
            emit.value(&result, |w| writeln!(w, "{}", result.notation))?;
        }
        Command::ChainIndex => {
            let result = service.chain_index(scheme, lang)?;
            let text = indexes::chain_index_tsv(service.scheme(scheme)?, &result.lang)?;
            emit.value(&result, |w| write!(w, "{text}"))?;
        }
        Command::RelativeIndex => {
            let result = service.relative_index(scheme, lang)?;
            let text = indexes::relative_index_tsv(service.scheme(scheme)?, &result.lang);
            emit.value(&result, |w| write!(w, "{text}"))?;
        }
        Command::ExportSkos => {
            let result = service.skos(scheme)?;
            emit.value(&result, |w| write!(w, "{}", result.text))?;
        }
        Command::Authority { notations, langs } => {
            let result = service.authority(scheme, notations, Some(langs))?;
            for skipped in &result.skipped {
                let _ = writeln!(err, "skipped: {skipped}");
            }
            emit.value(&result, |w| write!(w, "{}", result.text))?;
        }
        Command::Map {
            source_scheme,
            notation,
            to,
        } => {
            let t = service.map(source_scheme, notation, to)?;
            emit.value(&t, |w| match (&t.target_notation, t.exactness) {
                (Some(target), Some(exactness)) if t.hops == 0 => writeln!(w, "{target} {}", exactness.as_str()),
                (Some(target), Some(exactness)) => {
                    let via = t.matched_source.as_ref().map(|m| m.canonical()).unwrap_or_default();
                    let unit = if t.hops == 1 { "hop" } else { "hops" };
                    writeln!(w, "{target} {} ({} {unit} via {via})", exactness.as_str(), t.hops)
                }
                _ => writeln!(w, "no mapping"),
            })?;
        }
        Command::Suggest { text, top } => {
            let result = service.suggest(scheme, text, lang, *top)?;
            emit.value(&result, |w| {
                let rows: Vec<Vec<String>> = result
                    .suggestions
                    .iter()
                    .map(|s| vec![s.notation.canonical(), s.caption.clone(), s.score.to_string()])
                    .collect();
                write!(w, "{}", aligned(&["Notation", "Caption", "Score"], &rows))
            })?;
        }
        Command::Serve { port, host } => {
            let addr = SocketAddr::new(*host, port.unwrap_or(service.config().port));
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| ServiceError::Config(format!("cannot start runtime: {e}")))?;
            runtime.block_on(http::serve(Arc::new(service), addr, |bound| {
                let _ = writeln!(err, "listening on http://{bound}");
            }))?;
        }
    }
    Ok(0)
}

struct Emitter<'a> {
    json: bool,
    out: &'a mut dyn Write,
}

impl Emitter<'_> {
    fn value<T: Serialize>(
        &mut self,
        value: &T,
        plain: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
    ) -> Result<(), ServiceError> {
        let written = if self.json {
            let text = serde_json::to_string_pretty(value).expect("results serialize");
            writeln!(self.out, "{text}")
        } else {
            plain(self.out)
        };
        written.map_err(|e| ServiceError::Config(format!("cannot write output: {e}")))
    }
}
