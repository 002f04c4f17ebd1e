mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use p1cube::construction::{build, build_raw, invariants, toric_obstruction, BuildRecipe, PolarizedVariety, Section};
use p1cube::cube::{cube_from_weights, hilbert_series_wp, MuVector, Vertex, WeightCube};
use p1cube::geometry::{Geometry, PointType};
use p1cube::model::{bundled, ModelSpec};
use p1cube::rr::{candidate_points, match_basket, CalibrationTable, MatchLimits};
use p1cube::search::{enumerate, merge_db, reference_diff, verify_model, Adjunction, SearchConfig};
use p1cube::series::fmt_q;

use report::{Format, Report};

#[derive(Parser)]
#[command(name = "p1cube", version, about = "Orbifold del Pezzo surfaces in the weighted P1xP1xP1 format")]
struct Cli {
    /// Output style.
    #[arg(long, value_enum, default_value = "human", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hilbert series of the format for a μ vector or a weight cube.
    Hilbert {
        #[command(flatten)]
        cube: CubeArgs,
        /// Number of coefficients to print.
        #[arg(long, default_value_t = 12)]
        order: usize,
    },
    /// Build a variety and print its invariants and basket.
    Construct(RecipeArgs),
    /// Like `construct`, with coordinate points, strata and the base locus of |-K|.
    Analyze(RecipeArgs),
    /// Enumerate candidates within the search window.
    Search(SearchArgs),
    /// Check a model family against its declared invariants.
    VerifyModel {
        /// Config file, or the name of a bundled model (mi1..mi5, m12).
        model: String,
        /// Range of n, as `a..b` or a single value.
        #[arg(long, default_value = "1..5")]
        n: String,
        /// Calibration cache; read when present, written otherwise.
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Calibrate every isolated type up to an order and write the cache.
    Calibrate {
        #[arg(long, default_value_t = 20)]
        max_order: i64,
        #[arg(long, default_value = "calibration.cache")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CubeArgs {
    /// μ = a1,a2,b1,b2,c1,c2.
    #[arg(long, conflicts_with = "cube", allow_hyphen_values = true)]
    mu: Option<String>,
    /// Eight vertex weights w111,w112,...,w222.
    #[arg(long, allow_hyphen_values = true)]
    cube: Option<String>,
}

#[derive(Args)]
struct RecipeArgs {
    #[command(flatten)]
    cube: CubeArgs,
    /// Cone weights, comma separated.
    #[arg(long, default_value = "")]
    cones: String,
    /// Sections as degree@vertex (e.g. 8@X221) or degree@generic.
    #[arg(long, default_value = "")]
    sections: String,
    /// Take the recipe from a model (config file or bundled name) at --n.
    #[arg(long, conflicts_with_all = ["mu", "cube"])]
    model: Option<String>,
    #[arg(long, requires = "model")]
    n: Option<i64>,
    /// Allow any dimension; only the series data is reported.
    #[arg(long)]
    raw: bool,
}

#[derive(Args)]
struct SearchArgs {
    /// Index range `a..b` or a single index.
    #[arg(long, default_value = "1..16")]
    index: String,
    /// Bound on the adjunction number.
    #[arg(long, default_value_t = 96)]
    adjunction: i64,
    /// `minus` bounds Σw − I, `plus` bounds Σw + I.
    #[arg(long, default_value = "minus")]
    convention: String,
    #[arg(long, default_value_t = 1)]
    max_cones: usize,
    #[arg(long)]
    max_cone_weight: Option<i64>,
    /// Candidate database to merge the records into.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Calibration cache; read when present, written otherwise.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

fn parse_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().with_context(|| format!("not an integer: '{}'", x)))
        .collect()
}

fn parse_range(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s.split_once("..").unwrap_or((s, s));
    let a = a.trim().parse().with_context(|| format!("bad range '{}'", s))?;
    let b = b.trim().parse().with_context(|| format!("bad range '{}'", s))?;
    if a > b {
        bail!("empty range '{}'", s);
    }
    Ok((a, b))
}

fn parse_cube(args: &CubeArgs) -> Result<WeightCube> {
    if let Some(mu) = &args.mu {
        let v = parse_list(mu)?;
        let [a1, a2, b1, b2, c1, c2]: [i64; 6] = v.try_into().map_err(|_| anyhow!("μ needs six entries"))?;
        Ok(p1cube::cube::cube_weights(&MuVector::new(a1, a2, b1, b2, c1, c2))?)
    } else if let Some(c) = &args.cube {
        let w: [i64; 8] = parse_list(c)?.try_into().map_err(|_| anyhow!("a cube needs eight weights"))?;
        Ok(cube_from_weights(w)?)
    } else {
        bail!("give --mu or --cube")
    }
}

fn parse_section(s: &str) -> Result<Section> {
    let (d, v) = s.split_once('@').ok_or_else(|| anyhow!("section '{}' is not degree@vertex", s))?;
    let d: i64 = d.trim().parse().with_context(|| format!("bad section degree in '{}'", s))?;
    if v.trim() == "generic" {
        return Ok(Section::generic(d));
    }
    let v = Vertex::parse(v).ok_or_else(|| anyhow!("bad vertex in '{}'", s))?;
    Ok(Section::at(d, v))
}

fn load_model(name: &str) -> Result<ModelSpec> {
    if Path::new(name).exists() {
        let text = std::fs::read_to_string(name).with_context(|| format!("reading {}", name))?;
        return ModelSpec::parse(&text).with_context(|| format!("in {}", name));
    }
    bundled(&name.to_lowercase()).ok_or_else(|| anyhow!("no config file or bundled model named '{}'", name))
}

fn recipe_of(args: &RecipeArgs) -> Result<BuildRecipe> {
    if let Some(m) = &args.model {
        let n = args.n.ok_or_else(|| anyhow!("--model needs --n"))?;
        return Ok(load_model(m)?.instantiate(n)?);
    }
    let cube = parse_cube(&args.cube)?;
    let cones = parse_list(&args.cones)?;
    let sections = args.sections.split(',').filter(|s| !s.trim().is_empty()).map(parse_section).collect::<Result<_>>()?;
    Ok(BuildRecipe::new(cube, cones, sections))
}

fn load_table(path: Option<&Path>) -> Result<CalibrationTable> {
    match path {
        Some(p) if p.exists() => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(CalibrationTable::from_cache(&text).with_context(|| format!("in {}", p.display()))?)
        }
        _ => Ok(CalibrationTable::new()),
    }
}

fn save_table(path: Option<&Path>, table: &CalibrationTable) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, table.to_cache()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn cmd_hilbert(cube: &CubeArgs, order: usize) -> Result<Report> {
    let cube = parse_cube(cube)?;
    let s = hilbert_series_wp(&cube.mu())?;
    let mut r = Report::new();
    r.field("cube", "cube", join(&cube.weights(), ","));
    r.field("numerator", "numerator", &s.numerator);
    r.field("denominator", "denominator", join(s.denominator.factors(), ","));
    r.field("l", "l", cube.socle());
    let coeffs = s.expand(order)?;
    r.field("expansion", "expansion", coeffs.iter().map(fmt_q).collect::<Vec<_>>().join(", "));
    Ok(r)
}

fn describe(x: &PolarizedVariety, r: &mut Report) {
    let rec = &x.recipe;
    r.field("mu", "mu", join(&rec.cube.mu().as_array(), ","));
    r.field("cones", "cones", join(&rec.cones, ","));
    r.field("sections", "sections", join(&rec.sections, ","));
    r.field("ambient", "ambient", format!("P({})", join(&x.ambient_weights(), ",")));
    r.field("dim", "dim", x.dim);
    r.field("index", "I", x.kappa);
    r.field("series", "P(t)", &x.series);
}

fn cmd_construct(args: &RecipeArgs, full: bool) -> Result<Report> {
    let recipe = recipe_of(args)?;
    let mut r = Report::new();
    if args.raw {
        let x = build_raw(&recipe)?;
        describe(&x, &mut r);
        return Ok(r);
    }
    let x = build(&recipe)?;
    describe(&x, &mut r);
    let inv = invariants(&x)?;
    r.field("dsq", "D^2", fmt_q(&inv.dsq));
    r.field("minus_ksq", "-K^2", fmt_q(&inv.minus_ksq));
    r.field("h0", "h0(-K)", inv.h0);
    if toric_obstruction(&inv) {
        r.line("toric_obstructed", true, "toric degeneration obstructed");
    } else {
        r.line("toric_obstructed", false, "toric degeneration not obstructed by h0(-K)");
    }
    let g = Geometry::new(&x);
    r.field("wellformed", "wellformed", g.wellformed());
    let b = g.basket();
    r.field("basket", "basket", &b.basket);
    let canon: Vec<String> = b.basket.canonical().iter().map(|(p, k)| format!("{} x {}", k, p)).collect();
    r.field("basket_types", "basket types", if canon.is_empty() { "{}".to_string() } else { canon.join(", ") });
    for f in &b.flags {
        r.line("flag", f, format!("flag: {}", f));
    }
    let mut table = CalibrationTable::new();
    let cands = candidate_points(&x.ambient_weights(), x.kappa);
    let types: Vec<_> = cands.iter().map(|p| p.canonical()).collect();
    table.ensure(&types, i64::MAX)?;
    match match_basket(&x.series, x.kappa, &inv.dsq, &cands, &table, &MatchLimits::default()) {
        Ok(v) if v.is_empty() => r.line("rr_basket", "none", "Riemann-Roch: no feasible rigid basket"),
        Ok(v) => {
            for b in v {
                r.field("rr_basket", "Riemann-Roch basket", b);
            }
        }
        Err(e) => r.line("rr_basket", "error", format!("Riemann-Roch: {}", e)),
    }
    if !full {
        return Ok(r);
    }
    for p in g.coordinate_points() {
        let kind = match &p.kind {
            PointType::Smooth => "smooth".to_string(),
            PointType::Orbifold(q) => q.to_string(),
            PointType::Unresolved(s) => format!("unresolved ({})", s),
        };
        let on = if p.on_x { "on X" } else { "not on X" };
        let value = format!("{} w={} {} {}", p.label, p.weight, on, kind);
        r.line("point", &value, format!("point {}: weight {}, {}, {}", p.label, p.weight, on, kind));
    }
    for s in g.strata() {
        let pts = s.coordinate_points();
        let value = format!("g={} vars={} dim={} points={}", s.g, s.variables.join(","), s.dim, pts.join(","));
        r.line(
            "stratum",
            &value,
            format!(
                "stratum g = {}: variables {{{}}}, dim {}, coordinate points {{{}}}",
                s.g,
                s.variables.join(","),
                s.dim,
                pts.join(",")
            ),
        );
    }
    let base = g.base_locus(x.kappa);
    if base.is_empty() {
        r.line("base_locus", "empty", "base locus of |-K|: empty");
    }
    for c in base {
        let value = format!("{{{}}} dim={}", c.support.join(","), c.dim);
        r.line("base_locus", &value, format!("base locus of |-K|: {}", value));
    }
    Ok(r)
}

fn cmd_search(args: &SearchArgs) -> Result<Report> {
    let (index_min, index_max) = parse_range(&args.index)?;
    let convention = Adjunction::parse(&args.convention).ok_or_else(|| anyhow!("convention is 'plus' or 'minus'"))?;
    let config = SearchConfig {
        index_min,
        index_max,
        adjunction: args.adjunction,
        convention,
        max_cones: args.max_cones,
        max_cone_weight: args.max_cone_weight,
        ..Default::default()
    };
    let mut table = load_table(args.calibration.as_deref())?;
    let outcome = enumerate(&config, &mut table)?;
    save_table(args.calibration.as_deref(), &table)?;
    let mut r = Report::new();
    for rec in &outcome.records {
        r.line("record", rec.to_line(), rec.to_line());
    }
    for (i, c) in outcome.counts(&config) {
        r.line(&format!("count_{}", i), c, format!("index {}: {} candidates", i, c));
    }
    let n = outcome.records.len();
    r.line("candidates", n, format!("{} candidate{}", n, if n == 1 { "" } else { "s" }));
    let s = &outcome.stats;
    r.line(
        "stats",
        format!(
            "formats={} recipes={} repeated_ambient={} not_wellformed={} not_periodic={} rejected_modp={} rejected_exact={} duplicates={}",
            s.formats, s.recipes, s.repeated_ambient, s.not_wellformed, s.not_periodic, s.rejected_modp, s.rejected_exact, s.duplicates
        ),
        format!(
            "{} formats, {} recipes, {} repeated ambients, {} not wellformed, {} not periodic, {} rejected mod p, {} rejected exactly, {} duplicates",
            s.formats, s.recipes, s.repeated_ambient, s.not_wellformed, s.not_periodic, s.rejected_modp, s.rejected_exact, s.duplicates
        ),
    );
    for d in reference_diff(&outcome, &config) {
        r.line("diff", &d, &d);
    }
    if let Some(db) = &args.db {
        let existing = if db.exists() {
            std::fs::read_to_string(db).with_context(|| format!("reading {}", db.display()))?
        } else {
            format!("{}\n", p1cube::search::DB_HEADER)
        };
        let lines: Vec<String> = outcome.records.iter().map(|x| x.to_line()).collect();
        let merged = merge_db(&existing, &lines).with_context(|| format!("in {}", db.display()))?;
        std::fs::write(db, merged).with_context(|| format!("writing {}", db.display()))?;
    }
    Ok(r)
}

fn cmd_verify(model: &str, n: &str, calibration: Option<&Path>) -> Result<(Report, bool)> {
    let spec = load_model(model)?;
    let (a, b) = parse_range(n)?;
    let mut table = load_table(calibration)?;
    let ns: Vec<i64> = (a..=b).collect();
    let reports = verify_model(&spec, &ns, &mut table);
    save_table(calibration, &table)?;
    let mut r = Report::new();
    let mut ok = true;
    for rep in &reports {
        let head = format!("{} n={} r={}", rep.model, rep.n, rep.r);
        if let Some(e) = &rep.error {
            ok = false;
            r.line("error", format!("{}\t{}", head, e), format!("{}: ERROR {}", head, e));
            continue;
        }
        for c in &rep.checks {
            ok &= c.pass;
            let verdict = if c.pass { "pass" } else { "FAIL" };
            let expected = if c.expected.is_empty() || c.expected == c.actual {
                String::new()
            } else {
                format!(" (expected {})", c.expected)
            };
            r.line(
                "check",
                format!("{}\tfield={}\tactual={}\texpected={}\tresult={}", head, c.field, c.actual, c.expected, verdict),
                format!("{}: {} = {}{} {}", head, c.field, c.actual, expected, verdict),
            );
        }
    }
    let passed = reports.iter().filter(|x| x.passed()).count();
    r.line(
        "summary",
        format!("{}/{}", passed, reports.len()),
        format!("{} of {} instances pass", passed, reports.len()),
    );
    Ok((r, ok))
}

fn cmd_calibrate(max_order: i64, out: &Path) -> Result<Report> {
    let table = CalibrationTable::calibrate_all(max_order)?;
    std::fs::write(out, table.to_cache()).with_context(|| format!("writing {}", out.display()))?;
    let mut r = Report::new();
    r.field("types", "types", table.entries.len());
    r.field("cache", "cache", out.display());
    Ok(r)
}

fn run(cli: &Cli) -> Result<bool> {
    let (report, ok) = match &cli.command {
        Command::Hilbert { cube, order } => (cmd_hilbert(cube, *order)?, true),
        Command::Construct(a) => (cmd_construct(a, false)?, true),
        Command::Analyze(a) => (cmd_construct(a, true)?, true),
        Command::Search(a) => (cmd_search(a)?, true),
        Command::VerifyModel { model, n, calibration } => cmd_verify(model, n, calibration.as_deref())?,
        Command::Calibrate { max_order, out } => (cmd_calibrate(*max_order, out)?, true),
    };
    print!("{}", report.render(cli.format));
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::FAILURE
        }
    }
}
