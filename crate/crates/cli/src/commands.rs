use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use formula_gcl::embed::{train_token_table, EmbeddingTable};
use formula_gcl::encoder::{load_checkpoint, save_checkpoint, train_gcl, Checkpoint};
use formula_gcl::eval::{
    binarize, evaluate, format_results_csv, generate_synthetic_benchmark, load_qrels, render_heatmap, run_experiment,
    RelevanceSetting,
};
use formula_gcl::formula::{build_graph, graph_signature, load_corpus, parse_formula, write_records, FormulaAst, MathGraph};
use formula_gcl::index::{build_index, format_run, query, read_run, FormulaEmbedder, FormulaIndex, RankedList};

use crate::config::{Model, RunConfig};
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, contents).map_err(|e| CliError::io(path.display(), e))
}

/// Records the effective config (seed included) next to an artifact.
fn write_config_echo(cfg: &RunConfig, artifact: &Path) -> Result<()> {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".config");
    write_file(&PathBuf::from(name), cfg.to_text())
}

fn corpus(path: &Path) -> Result<Vec<(String, FormulaAst)>> {
    load_corpus(path).map_err(|e| {
        let e = CliError::from(e);
        CliError { message: format!("{}: {}", path.display(), e.message), ..e }
    })
}

fn graphs(corpus: &[(String, FormulaAst)], cfg: &RunConfig) -> Vec<MathGraph> {
    corpus.iter().map(|(_, ast)| build_graph(ast, cfg.layout)).collect()
}

pub fn parse(cfg: &RunConfig, latex: &str) -> Result<String> {
    let ast = parse_formula(latex)?;
    let g = build_graph(&ast, cfg.layout);
    let mut out = String::new();
    writeln!(out, "layout {}", g.layout).unwrap();
    writeln!(out, "signature {}", graph_signature(&g)).unwrap();
    writeln!(out, "nodes {}", g.node_count()).unwrap();
    for (i, n) in g.nodes.iter().enumerate() {
        let root = if i == g.root { " root" } else { "" };
        writeln!(out, "  {i} {}{root}", n.label).unwrap();
    }
    writeln!(out, "edges {}", g.edge_count()).unwrap();
    for e in &g.edges {
        writeln!(out, "  {} -> {} {}", e.src, e.dst, e.label).unwrap();
    }
    Ok(out)
}

pub fn synth(cfg: &RunConfig) -> Result<String> {
    let bench = generate_synthetic_benchmark(&cfg.synth, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    let records = |rs: &[formula_gcl::formula::CorpusRecord]| {
        let mut buf = Vec::new();
        write_records(&mut buf, rs).expect("writing into memory");
        buf
    };
    let (corpus, queries, qrels) = (cfg.corpus_path(), cfg.queries_path(), cfg.qrels_path());
    write_file(&corpus, records(&bench.corpus))?;
    write_file(&queries, records(&bench.queries))?;
    write_file(&qrels, bench.qrels.to_text())?;
    write_config_echo(cfg, &qrels)?;
    Ok(format!(
        "wrote {} formulas to {}, {} queries to {}, {} judgments to {}\n",
        bench.corpus.len(),
        corpus.display(),
        bench.queries.len(),
        queries.display(),
        bench.qrels.len(),
        qrels.display()
    ))
}

pub fn train_tokens(cfg: &RunConfig) -> Result<String> {
    let corpus = corpus(&cfg.corpus_path())?;
    let (table, history) =
        train_token_table(&graphs(&corpus, cfg), &cfg.tokens, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    let path = cfg.table_path();
    let mut bytes = Vec::new();
    table.write_to(&mut bytes).map_err(|e| CliError::io("serializing table", e))?;
    write_file(&path, bytes)?;
    write_config_echo(cfg, &path)?;
    let loss = history.last().map_or("n/a (no epochs)".to_string(), |l| format!("{l:.6}"));
    Ok(format!("{} tokens, dim {}; final loss {loss}; wrote {}\n", table.vocab.len(), table.dim, path.display()))
}

fn load_table(cfg: &RunConfig) -> Result<EmbeddingTable> {
    Ok(EmbeddingTable::load(&cfg.table_path())?)
}

pub fn train_gcl_cmd(cfg: &RunConfig) -> Result<String> {
    let train = cfg.train_config();
    train.validate()?;
    let corpus = corpus(&cfg.corpus_path())?;
    let table = load_table(cfg)?;
    let (params, history) =
        train_gcl(&graphs(&corpus, cfg), &table, &train, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    let ckpt = Checkpoint { params, config: train, history };
    let path = cfg.checkpoint_path();
    ensure_parent(&path)?;
    save_checkpoint(&ckpt, &path)?;
    let mut csv = String::from("epoch,loss\n");
    for (i, l) in ckpt.history.iter().enumerate() {
        writeln!(csv, "{},{l}", i + 1).unwrap();
    }
    let mut loss_path = path.as_os_str().to_owned();
    loss_path.push(".loss.csv");
    let loss_path = PathBuf::from(loss_path);
    write_file(&loss_path, csv)?;
    let last = ckpt.history.last().map_or("n/a (no epochs)".to_string(), |l| format!("{l:.6}"));
    Ok(format!(
        "checkpoint {} ({} parameters); final loss {last}; wrote {} and {}\n",
        ckpt.id(),
        ckpt.params.parameter_count(),
        path.display(),
        loss_path.display()
    ))
}

/// Runs `f` with the configured embedder.
fn with_embedder<T>(cfg: &RunConfig, f: impl FnOnce(&FormulaEmbedder<'_>) -> Result<T>) -> Result<T> {
    let table = load_table(cfg)?;
    match cfg.model {
        Model::Baseline => f(&FormulaEmbedder::baseline(&table, cfg.layout)),
        Model::Gcl => {
            let ckpt = load_checkpoint(&cfg.checkpoint_path())?;
            f(&FormulaEmbedder::trained(&table, &ckpt.params, &ckpt.id(), cfg.layout))
        }
    }
}

pub fn index(cfg: &RunConfig) -> Result<String> {
    let corpus = corpus(&cfg.corpus_path())?;
    let index = with_embedder(cfg, |e| Ok(build_index(&corpus, e)?))?;
    let path = cfg.index_path();
    ensure_parent(&path)?;
    index.save(&path)?;
    write_config_echo(cfg, &path)?;
    Ok(format!("indexed {} formulas ({}); wrote {}\n", index.len(), index.provenance, path.display()))
}

fn format_ranking(r: &RankedList) -> String {
    r.results.iter().enumerate().map(|(i, (doc, score))| format!("{} {doc} {score:.6}\n", i + 1)).collect()
}

/// One formula, printed as `rank docid score` lines.
pub fn query_one(cfg: &RunConfig, latex: &str, k: usize) -> Result<String> {
    let index = FormulaIndex::load(&cfg.index_path())?;
    let ranked = with_embedder(cfg, |e| Ok(query(&index, e, "query", latex, k)?))?;
    Ok(format_ranking(&ranked))
}

/// Every formula of the queries file, as a TREC run.
pub fn query_all(cfg: &RunConfig, k: usize) -> Result<String> {
    let index = FormulaIndex::load(&cfg.index_path())?;
    let queries = corpus(&cfg.queries_path())?;
    let rankings = with_embedder(cfg, |e| {
        queries
            .iter()
            .map(|(qid, ast)| {
                let latex = formula_gcl::formula::unparse(ast);
                Ok(query(&index, e, qid, &latex, k)?)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(format_run(&rankings, "fgcl"))
}

pub fn eval(cfg: &RunConfig, run: &Path, setting: &str) -> Result<String> {
    let setting = RelevanceSetting::parse(setting)
        .ok_or_else(|| CliError::invalid(format!("unknown setting `{setting}` (expected full or partial)")))?;
    let rankings = read_run(run)?;
    let qrels = load_qrels(&cfg.qrels_path())?;
    let score = evaluate(&rankings, &binarize(&qrels, setting));
    let mut out = String::new();
    for (q, s) in &score.per_query {
        writeln!(out, "bpref\t{q}\t{s:.4}").unwrap();
    }
    for q in &score.skipped {
        writeln!(out, "skipped\t{q}\tno relevant judgments").unwrap();
    }
    writeln!(out, "bpref\tall\t{:.4}", score.mean).unwrap();
    Ok(out)
}

pub fn bench(cfg: &RunConfig) -> Result<String> {
    let grid = cfg.grid_config();
    grid.validate()?;
    let docs = corpus(&cfg.corpus_path())?;
    let queries = corpus(&cfg.queries_path())?;
    let qrels = load_qrels(&cfg.qrels_path())?;
    let (rows, stats) = run_experiment(&grid, &docs, &queries, &qrels)?;
    let results = cfg.work_dir.join("results.csv");
    write_file(&results, format_results_csv(&rows))?;
    write_config_echo(cfg, &results)?;
    let mut out = String::new();
    for &layout in &grid.layouts {
        for setting in RelevanceSetting::ALL {
            let h = render_heatmap(&stats, layout, setting, &grid.methods, &grid.batch_sizes)?;
            let stem = cfg.work_dir.join(format!("heatmap-{layout}-{}", setting.name()));
            write_file(&stem.with_extension("txt"), &h.text)?;
            write_file(&stem.with_extension("csv"), &h.csv)?;
            out.push_str(&h.text);
            out.push('\n');
        }
    }
    writeln!(out, "{} result rows; wrote {}", rows.len(), results.display()).unwrap();
    Ok(out)
}
