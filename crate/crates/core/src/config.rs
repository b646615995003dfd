//! Scene files: flat INI-style blocks of `key = value` lines.
//!
//! ```text
//! [semigroup]
//! label = annulus
//! generator = power d=2 b=1
//! generator = power d=2 b=2
//!
//! [grid]
//! re_min = -3.0
//! re_max = 3.0
//! im_min = -3.0
//! im_max = 3.0
//! width = 600
//! height = 600
//! ```
//!
//! `[semigroup]` and `[grid]` are required. `[escape]`, `[julia]`, `[ifs]`,
//! `[checks]` and `[output]` fall back to defaults. Lines starting with `#`
//! or `;` are comments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::catalog::{parse_complex, parse_map, render_complex, ComplexPoint, MapDescriptor};
use crate::checks::{CheckConfig, GateConfig, Thresholds};
use crate::error::{Error, Result};
use crate::escape::EscapeParams;
use crate::grid::GridSpec;
use crate::julia::{BandMode, JuliaParams, DEFAULT_BURN_IN};
use crate::semigroup::{SemigroupSpec, Word};

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupBlock {
    pub label: String,
    pub generators: Vec<MapDescriptor>,
    /// Overrides `[escape] max_word_len` when set.
    pub word_depth: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfsBlock {
    pub count: usize,
    pub burn_in: usize,
    pub chains: usize,
}

impl Default for IfsBlock {
    fn default() -> Self {
        IfsBlock {
            count: 100_000,
            burn_in: DEFAULT_BURN_IN,
            chains: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChecksBlock {
    pub thresholds: Thresholds,
    pub gate: GateConfig,
    pub sample_count: usize,
    /// Parameter of the `<z^2, z^2/a>` reference.
    pub annulus_a: ComplexPoint,
    /// Element used by the inclusion check.
    pub inclusion_word: Vec<usize>,
}

impl Default for ChecksBlock {
    fn default() -> Self {
        let c = CheckConfig::default();
        ChecksBlock {
            thresholds: c.thresholds,
            gate: c.gate,
            sample_count: c.sample_count,
            annulus_a: ComplexPoint::new(2.0, 0.0),
            inclusion_word: vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputBlock {
    pub seed: u64,
    pub pgm: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub semigroup: SemigroupBlock,
    pub grid: GridSpec,
    pub escape: EscapeParams,
    pub boundary_band: usize,
    pub mode: BandMode,
    pub ifs: IfsBlock,
    pub checks: ChecksBlock,
    pub output: OutputBlock,
}

impl SceneConfig {
    pub fn spec(&self) -> Result<SemigroupSpec> {
        SemigroupSpec::new(self.semigroup.label.clone(), self.semigroup.generators.clone())
    }

    /// Escape parameters with the semigroup's `word_depth` applied.
    pub fn escape_params(&self) -> EscapeParams {
        match self.semigroup.word_depth {
            Some(l) => self.escape.with_word_len(l),
            None => self.escape,
        }
    }

    pub fn julia_params(&self) -> JuliaParams {
        JuliaParams {
            escape: self.escape_params(),
            boundary_band: self.boundary_band,
            mode: self.mode,
        }
    }

    pub fn check_config(&self, seed: u64) -> CheckConfig {
        CheckConfig {
            band: self.boundary_band,
            thresholds: self.checks.thresholds,
            gate: self.checks.gate,
            sample_count: self.checks.sample_count,
            seed,
        }
    }

    pub fn inclusion_word(&self) -> Result<Word> {
        Word::new(self.checks.inclusion_word.clone(), self.semigroup.generators.len())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let blocks = split_blocks(text)?;
        let mut semigroup = None;
        let mut grid = None;
        let mut escape = EscapeParams::default();
        let mut julia = JuliaParams::default();
        let mut ifs = IfsBlock::default();
        let mut checks = ChecksBlock::default();
        let mut output = OutputBlock::default();
        for block in &blocks {
            match block.name.as_str() {
                "semigroup" => semigroup = Some(parse_semigroup(block)?),
                "grid" => grid = Some(parse_grid(block)?),
                "escape" => escape = parse_escape(block)?,
                "julia" => {
                    let mut b = Keys::new(block, &["boundary_band", "mode"])?;
                    julia.boundary_band = b.num("boundary_band", julia.boundary_band)?;
                    if let Some((line, v)) = b.take("mode") {
                        julia.mode = BandMode::parse(v).map_err(|e| at(line, e))?;
                    }
                }
                "ifs" => {
                    let mut b = Keys::new(block, &["count", "burn_in", "chains"])?;
                    ifs.count = b.num("count", ifs.count)?;
                    ifs.burn_in = b.num("burn_in", ifs.burn_in)?;
                    ifs.chains = b.num("chains", ifs.chains)?;
                }
                "checks" => checks = parse_checks(block)?,
                "output" => {
                    let mut b = Keys::new(block, &["seed", "pgm", "csv", "report"])?;
                    output.seed = b.num("seed", 0)?;
                    output.pgm = b.take("pgm").map(|(_, v)| PathBuf::from(v));
                    output.csv = b.take("csv").map(|(_, v)| PathBuf::from(v));
                    output.report = b.take("report").map(|(_, v)| PathBuf::from(v));
                }
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown block [{other}]",
                        block.line
                    )))
                }
            }
        }
        let semigroup = semigroup.ok_or_else(|| Error::Config("missing [semigroup] block".into()))?;
        let grid = grid.ok_or_else(|| Error::Config("missing [grid] block".into()))?;
        let scene = SceneConfig {
            semigroup,
            grid,
            escape,
            boundary_band: julia.boundary_band,
            mode: julia.mode,
            ifs,
            checks,
            output,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        self.grid.validate().map_err(wrap)?;
        self.julia_params().validate().map_err(wrap)?;
        if self.semigroup.label.is_empty() || self.semigroup.label.contains(char::is_whitespace) {
            return Err(Error::Config(format!(
                "semigroup label `{}` must be nonempty without whitespace",
                self.semigroup.label
            )));
        }
        if self.ifs.count == 0 || self.ifs.chains == 0 {
            return Err(Error::Config("ifs count and chains must be at least 1".into()));
        }
        if self.checks.sample_count == 0 || self.checks.gate.count == 0 {
            return Err(Error::Config("check sample counts must be at least 1".into()));
        }
        self.inclusion_word().map_err(wrap)?;
        Ok(())
    }

    /// Text form; `parse(to_text())` reproduces every field.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sg = &self.semigroup;
        let _ = writeln!(s, "[semigroup]\nlabel = {}", sg.label);
        for g in &sg.generators {
            let _ = writeln!(s, "generator = {}", g.render());
        }
        if let Some(l) = sg.word_depth {
            let _ = writeln!(s, "word_depth = {l}");
        }
        let g = &self.grid;
        let _ = writeln!(
            s,
            "\n[grid]\nre_min = {:?}\nre_max = {:?}\nim_min = {:?}\nim_max = {:?}\nwidth = {}\nheight = {}",
            g.re_min, g.re_max, g.im_min, g.im_max, g.width, g.height
        );
        let e = &self.escape;
        let _ = writeln!(
            s,
            "\n[escape]\nradius = {:?}\nmax_iter = {}\nmax_word_len = {}\nconfirm = {}",
            e.radius, e.max_iter, e.max_word_len, e.confirm
        );
        let _ = writeln!(
            s,
            "\n[julia]\nboundary_band = {}\nmode = {}",
            self.boundary_band,
            self.mode.name()
        );
        let _ = writeln!(
            s,
            "\n[ifs]\ncount = {}\nburn_in = {}\nchains = {}",
            self.ifs.count, self.ifs.burn_in, self.ifs.chains
        );
        let c = &self.checks;
        let t = &c.thresholds;
        let _ = writeln!(s, "\n[checks]");
        for (k, v) in [
            ("threshold_forward", t.forward),
            ("threshold_backward", t.backward),
            ("threshold_intersection", t.intersection),
            ("threshold_union", t.union),
            ("threshold_abelian", t.abelian),
            ("threshold_inclusion", t.inclusion),
            ("threshold_annulus", t.annulus),
            ("threshold_sampled_forward", t.sampled_forward),
        ] {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        let word: Vec<String> = c.inclusion_word.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(
            s,
            "gate_center = {}\ngate_radius = {:?}\ngate_count = {}\ngate_tolerance = {:?}\nsample_count = {}\nannulus_a = {}\ninclusion_word = {}",
            render_complex(c.gate.center),
            c.gate.radius,
            c.gate.count,
            c.gate.tolerance,
            c.sample_count,
            render_complex(c.annulus_a),
            word.join(",")
        );
        let o = &self.output;
        let _ = writeln!(s, "\n[output]\nseed = {}", o.seed);
        for (k, v) in [("pgm", &o.pgm), ("csv", &o.csv), ("report", &o.report)] {
            if let Some(p) = v {
                let _ = writeln!(s, "{k} = {}", p.display());
            }
        }
        s
    }
}

struct Block {
    name: String,
    line: usize,
    entries: Vec<(usize, String, String)>,
}

fn split_blocks(text: &str) -> Result<Vec<Block>> {
    let mut blocks: Vec<Block> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| {
                Error::Config(format!("line {line_no}: unterminated block header"))
            })?;
            let name = name.trim().to_string();
            if blocks.iter().any(|b| b.name == name) {
                return Err(Error::Config(format!("line {line_no}: duplicate block [{name}]")));
            }
            blocks.push(Block {
                name,
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line_no}: expected `key = value`")))?;
        let block = blocks
            .last_mut()
            .ok_or_else(|| Error::Config(format!("line {line_no}: entry before any block")))?;
        block
            .entries
            .push((line_no, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(blocks)
}

fn at(line: usize, e: Error) -> Error {
    Error::Config(format!("line {line}: {e}"))
}

/// Single-valued keys of one block.
struct Keys<'a> {
    block: &'a str,
    entries: Vec<(usize, &'a str, &'a str)>,
}

impl<'a> Keys<'a> {
    fn new(block: &'a Block, allowed: &[&str]) -> Result<Self> {
        let mut entries: Vec<(usize, &str, &str)> = Vec::new();
        for (line, k, v) in &block.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!(
                    "line {line}: unknown key `{k}` in [{}]",
                    block.name
                )));
            }
            if entries.iter().any(|e| e.1 == k) {
                return Err(Error::Config(format!("line {line}: duplicate key `{k}`")));
            }
            entries.push((*line, k, v));
        }
        Ok(Keys {
            block: &block.name,
            entries,
        })
    }

    fn take(&mut self, key: &str) -> Option<(usize, &'a str)> {
        let pos = self.entries.iter().position(|e| e.1 == key)?;
        let (line, _, v) = self.entries.remove(pos);
        Some((line, v))
    }

    fn require(&mut self, key: &str) -> Result<(usize, &'a str)> {
        self.take(key)
            .ok_or_else(|| Error::Config(format!("[{}]: missing key `{key}`", self.block)))
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            Some((line, v)) => parse_num(line, key, v),
            None => Ok(default),
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("line {line}: bad value `{v}` for `{key}`")))
}

fn parse_semigroup(block: &Block) -> Result<SemigroupBlock> {
    let mut label = None;
    let mut generators = Vec::new();
    let mut word_depth = None;
    for (line, k, v) in &block.entries {
        match k.as_str() {
            "generator" => generators.push(parse_map(v).map_err(|e| at(*line, e))?),
            "label" if label.is_none() => label = Some(v.clone()),
            "word_depth" if word_depth.is_none() => word_depth = Some(parse_num(*line, k, v)?),
            "label" | "word_depth" => {
                return Err(Error::Config(format!("line {line}: duplicate key `{k}`")))
            }
            _ => {
                return Err(Error::Config(format!(
                    "line {line}: unknown key `{k}` in [semigroup]"
                )))
            }
        }
    }
    if generators.is_empty() {
        return Err(Error::Config("[semigroup]: at least one `generator` line".into()));
    }
    Ok(SemigroupBlock {
        label: label.ok_or_else(|| Error::Config("[semigroup]: missing key `label`".into()))?,
        generators,
        word_depth,
    })
}

fn parse_grid(block: &Block) -> Result<GridSpec> {
    let mut b = Keys::new(block, &["re_min", "re_max", "im_min", "im_max", "width", "height"])?;
    let mut real = |k: &str| -> Result<f64> {
        let (line, v) = b.require(k)?;
        parse_num(line, k, v)
    };
    let (re_min, re_max, im_min, im_max) = (real("re_min")?, real("re_max")?, real("im_min")?, real("im_max")?);
    let (lw, w) = b.require("width")?;
    let (lh, h) = b.require("height")?;
    Ok(GridSpec {
        re_min,
        re_max,
        im_min,
        im_max,
        width: parse_num(lw, "width", w)?,
        height: parse_num(lh, "height", h)?,
    })
}

fn parse_escape(block: &Block) -> Result<EscapeParams> {
    let d = EscapeParams::default();
    let mut b = Keys::new(block, &["radius", "max_iter", "max_word_len", "confirm"])?;
    Ok(EscapeParams {
        radius: b.num("radius", d.radius)?,
        max_iter: b.num("max_iter", d.max_iter)?,
        max_word_len: b.num("max_word_len", d.max_word_len)?,
        confirm: b.num("confirm", d.confirm)?,
    })
}

fn parse_checks(block: &Block) -> Result<ChecksBlock> {
    let d = ChecksBlock::default();
    let mut b = Keys::new(
        block,
        &[
            "threshold_forward",
            "threshold_backward",
            "threshold_intersection",
            "threshold_union",
            "threshold_abelian",
            "threshold_inclusion",
            "threshold_annulus",
            "threshold_sampled_forward",
            "gate_center",
            "gate_radius",
            "gate_count",
            "gate_tolerance",
            "sample_count",
            "annulus_a",
            "inclusion_word",
        ],
    )?;
    let t = d.thresholds;
    let thresholds = Thresholds {
        forward: b.num("threshold_forward", t.forward)?,
        backward: b.num("threshold_backward", t.backward)?,
        intersection: b.num("threshold_intersection", t.intersection)?,
        union: b.num("threshold_union", t.union)?,
        abelian: b.num("threshold_abelian", t.abelian)?,
        inclusion: b.num("threshold_inclusion", t.inclusion)?,
        annulus: b.num("threshold_annulus", t.annulus)?,
        sampled_forward: b.num("threshold_sampled_forward", t.sampled_forward)?,
    };
    let complex = |entry: Option<(usize, &str)>, default: ComplexPoint| match entry {
        Some((line, v)) => parse_complex(v).map_err(|e| at(line, e)),
        None => Ok(default),
    };
    let center = complex(b.take("gate_center"), d.gate.center)?;
    let gate = GateConfig {
        center,
        radius: b.num("gate_radius", d.gate.radius)?,
        count: b.num("gate_count", d.gate.count)?,
        tolerance: b.num("gate_tolerance", d.gate.tolerance)?,
    };
    let sample_count = b.num("sample_count", d.sample_count)?;
    let annulus_a = complex(b.take("annulus_a"), d.annulus_a)?;
    let inclusion_word = match b.take("inclusion_word") {
        Some((line, v)) => v
            .split(',')
            .map(|l| parse_num(line, "inclusion_word", l.trim()))
            .collect::<Result<Vec<usize>>>()?,
        None => d.inclusion_word,
    };
    Ok(ChecksBlock {
        thresholds,
        gate,
        sample_count,
        annulus_a,
        inclusion_word,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[semigroup]
label = annulus
generator = power d=2 b=1
generator = power d=2 b=2

[grid]
re_min = -3
re_max = 3
im_min = -3
im_max = 3
width = 60
height = 60
";

    #[test]
    fn minimal_scene_uses_defaults() {
        let s = SceneConfig::parse(MINIMAL).unwrap();
        assert_eq!(s.semigroup.generators.len(), 2);
        assert_eq!(s.escape, EscapeParams::default());
        assert_eq!(s.julia_params(), JuliaParams::default());
        assert_eq!(s.grid, GridSpec::square(3.0, 60).unwrap());
        assert_eq!(s.output, OutputBlock::default());
    }

    #[test]
    fn text_round_trip() {
        let mut s = SceneConfig::parse(MINIMAL).unwrap();
        s.semigroup.word_depth = Some(2);
        s.grid.re_min = -0.1 - 0.2;
        s.escape.radius = 123456.789e3;
        s.mode = BandMode::PerWord;
        s.ifs.chains = 4;
        s.checks.annulus_a = ComplexPoint::new(1.5, -0.25);
        s.checks.thresholds.union = 1.0 / 3.0;
        s.checks.inclusion_word = vec![1, 0];
        s.output.seed = u64::MAX;
        s.output.report = Some(PathBuf::from("out/r.txt"));
        let back = SceneConfig::parse(&s.to_text()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_text(), s.to_text());
    }

    #[test]
    fn word_depth_overrides_escape_block() {
        let text = MINIMAL.replace("label = annulus", "label = annulus\nword_depth = 5");
        let s = SceneConfig::parse(&text).unwrap();
        assert_eq!(s.escape_params().max_word_len, 5);
        assert_eq!(s.escape.max_word_len, 3);
    }

    #[test]
    fn errors_name_the_line() {
        let bad = MINIMAL.replace("width = 60", "width = sixty");
        match SceneConfig::parse(&bad) {
            Err(Error::Config(m)) => assert!(m.starts_with("line 11:"), "{m}"),
            other => panic!("{other:?}"),
        }
        let bad = MINIMAL.replace("generator = power d=2 b=2", "generator = power d=0 b=2");
        assert!(matches!(SceneConfig::parse(&bad), Err(Error::Config(m)) if m.starts_with("line 4:")));
    }

    #[test]
    fn rejects_structural_problems() {
        assert!(SceneConfig::parse("[grid]\n").is_err());
        assert!(SceneConfig::parse(&format!("{MINIMAL}\n[extra]\n")).is_err());
        assert!(SceneConfig::parse(&format!("{MINIMAL}\n[grid]\n")).is_err());
        assert!(SceneConfig::parse(&MINIMAL.replace("label = annulus", "label = two words")).is_err());
        assert!(SceneConfig::parse(&format!("{MINIMAL}\n[julia]\nboundary_band = 0\n")).is_err());
        assert!(SceneConfig::parse(&format!("{MINIMAL}\n[escape]\nradius = 1\n")).is_err());
        assert!(SceneConfig::parse(&format!("{MINIMAL}\n[checks]\ninclusion_word = 0,2\n")).is_err());
        assert!(SceneConfig::parse(&MINIMAL.replace("height = 60", "height = 60\nheight = 3")).is_err());
        assert!(SceneConfig::parse("stray = 1\n").is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let err = SceneConfig::load(Path::new("/nonexistent/scene.cfg")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/scene.cfg"));
    }
}
