//! The chain specification text format.
//!
//! ```text
//! # comment to end of line; blank lines are ignored
//! matrix <rows> <cols>          followed by <rows> lines of <cols> numbers
//! initial <name> <v0> <v1> ...  repeatable; name matches [A-Za-z][A-Za-z0-9_]*
//! random <count>                optional, default 0
//! steps <k>                     optional, default 15, at least 1
//! seed <u64>                    optional, default 0
//! ```
//!
//! Parsing is purely syntactic: the matrix is not checked for
//! stochasticity here. [`validate_matrix`] does that later and attaches the
//! source line to any failure.

use std::fmt;

use thiserror::Error;

use crate::matrix::{validate_stochastic, Matrix, MatrixError, StochasticMatrix, Vector};
use crate::numfmt;

pub const DEFAULT_STEPS: usize = 15;

/// The worked two-state example: A, four named initial states, two random
/// ones, 15 steps.
pub const REFERENCE_SPEC: &str = include_str!("../specs/reference.chain");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{}", located(*.line, message))]
    Syntax {
        line: Option<usize>,
        message: String,
    },
    #[error("line {line}: duplicate {key}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: unknown directive '{directive}'")]
    UnknownDirective { line: usize, directive: String },
}

fn located(line: Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("line {l}: {message}"),
        None => message.to_string(),
    }
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } => *line,
            ParseError::DuplicateKey { line, .. }
            | ParseError::DimensionMismatch { line, .. }
            | ParseError::UnknownDirective { line, .. } => Some(*line),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub name: String,
    pub state: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    /// Unvalidated transition matrix.
    pub matrix: Matrix,
    pub initials: Vec<InitialState>,
    pub random_initials: usize,
    pub steps: usize,
    pub seed: u64,
}

/// Line numbers (1-based) of the parsed items.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecLocations {
    pub matrix: usize,
    pub rows: Vec<usize>,
    pub initials: Vec<usize>,
}

pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_chain_spec(text: &str) -> Result<ChainSpec, ParseError> {
    parse_with_locations(text).map(|(spec, _)| spec)
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line: Some(line),
        message: message.into(),
    }
}

fn number(line: usize, token: &str) -> Result<f64, ParseError> {
    match token.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(syntax(line, format!("invalid number '{token}'"))),
    }
}

fn count<T: std::str::FromStr>(line: usize, what: &str, args: &[&str]) -> Result<T, ParseError> {
    match args {
        [one] => one
            .parse()
            .map_err(|_| syntax(line, format!("invalid {what} '{one}'"))),
        _ => Err(syntax(line, format!("{what} takes exactly one value"))),
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, key: &str) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(ParseError::DuplicateKey {
            line,
            key: key.to_string(),
        });
    }
    *slot = Some(value);
    Ok(())
}

/// Parses `text`, also returning where each item was declared.
pub fn parse_with_locations(text: &str) -> Result<(ChainSpec, SpecLocations), ParseError> {
    struct PendingMatrix {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    }

    let mut locs = SpecLocations::default();
    let mut matrix: Option<Matrix> = None;
    let mut pending: Option<PendingMatrix> = None;
    let mut initials: Vec<InitialState> = Vec::new();
    let mut random: Option<usize> = None;
    let mut steps: Option<usize> = None;
    let mut seed: Option<u64> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }

        if let Some(p) = pending.as_mut() {
            if tokens.len() != p.cols {
                return Err(syntax(line, format!("expected {} values", p.cols)));
            }
            for t in &tokens {
                p.data.push(number(line, t)?);
            }
            locs.rows.push(line);
            if p.data.len() == p.rows * p.cols {
                let p = pending.take().expect("pending matrix");
                let m =
                    Matrix::new(p.rows, p.cols, p.data).map_err(|e| syntax(line, e.to_string()))?;
                matrix = Some(m);
            }
            continue;
        }

        let (directive, args) = (tokens[0], &tokens[1..]);
        match directive {
            "matrix" => {
                if matrix.is_some() {
                    return Err(ParseError::DuplicateKey {
                        line,
                        key: "matrix".into(),
                    });
                }
                let [r, c] = args else {
                    return Err(syntax(line, "matrix takes <rows> <cols>"));
                };
                let rows: usize = r
                    .parse()
                    .map_err(|_| syntax(line, format!("invalid row count '{r}'")))?;
                let cols: usize = c
                    .parse()
                    .map_err(|_| syntax(line, format!("invalid column count '{c}'")))?;
                if rows == 0 || cols == 0 {
                    return Err(syntax(line, "matrix dimensions must be at least 1"));
                }
                locs.matrix = line;
                pending = Some(PendingMatrix {
                    rows,
                    cols,
                    data: Vec::with_capacity(rows * cols),
                });
            }
            "initial" => {
                let Some((name, values)) = args.split_first() else {
                    return Err(syntax(line, "initial takes <name> <values...>"));
                };
                if !is_valid_name(name) {
                    return Err(syntax(line, format!("invalid name '{name}'")));
                }
                if initials.iter().any(|i| i.name == *name) {
                    return Err(ParseError::DuplicateKey {
                        line,
                        key: format!("initial '{name}'"),
                    });
                }
                if values.is_empty() {
                    return Err(syntax(line, format!("initial '{name}' has no values")));
                }
                let values = values
                    .iter()
                    .map(|t| number(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                let state = Vector::new(values).map_err(|e| syntax(line, e.to_string()))?;
                initials.push(InitialState {
                    name: name.to_string(),
                    state,
                });
                locs.initials.push(line);
            }
            "random" => set_once(
                &mut random,
                count(line, "random count", args)?,
                line,
                "random",
            )?,
            "steps" => {
                let k: usize = count(line, "step count", args)?;
                if k == 0 {
                    return Err(syntax(line, "steps must be at least 1"));
                }
                set_once(&mut steps, k, line, "steps")?;
            }
            "seed" => set_once(&mut seed, count(line, "seed", args)?, line, "seed")?,
            other => {
                return Err(ParseError::UnknownDirective {
                    line,
                    directive: other.to_string(),
                })
            }
        }
    }

    if let Some(p) = pending {
        return Err(syntax(
            last_line,
            format!(
                "expected {} matrix rows, found {}",
                p.rows,
                p.data.len() / p.cols
            ),
        ));
    }
    let Some(matrix) = matrix else {
        return Err(ParseError::Syntax {
            line: None,
            message: "missing matrix directive".into(),
        });
    };
    for (init, &line) in initials.iter().zip(&locs.initials) {
        if init.state.len() != matrix.cols() {
            return Err(ParseError::DimensionMismatch {
                line,
                expected: matrix.cols(),
                found: init.state.len(),
            });
        }
    }

    let spec = ChainSpec {
        matrix,
        initials,
        random_initials: random.unwrap_or(0),
        steps: steps.unwrap_or(DEFAULT_STEPS),
        seed: seed.unwrap_or(0),
    };
    Ok((spec, locs))
}

/// Canonical text: matrix, initials in stored order, then `random` and
/// `seed` when nonzero and `steps` always. Numbers use the shortest form
/// that parses back exactly.
pub fn serialize_chain_spec(spec: &ChainSpec) -> String {
    let mut out = String::new();
    let m = &spec.matrix;
    out.push_str(&format!("matrix {} {}\n", m.rows(), m.cols()));
    for i in 0..m.rows() {
        push_numbers(&mut out, m.row(i));
        out.push('\n');
    }
    for init in &spec.initials {
        out.push_str("initial ");
        out.push_str(&init.name);
        out.push(' ');
        push_numbers(&mut out, init.state.as_slice());
        out.push('\n');
    }
    if spec.random_initials != 0 {
        out.push_str(&format!("random {}\n", spec.random_initials));
    }
    out.push_str(&format!("steps {}\n", spec.steps));
    if spec.seed != 0 {
        out.push_str(&format!("seed {}\n", spec.seed));
    }
    out
}

fn push_numbers(out: &mut String, xs: &[f64]) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&numfmt::shortest(*x));
    }
}

impl fmt::Display for ChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_chain_spec(self))
    }
}

/// A matrix validation failure tied to the line that caused it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}", located(*.line, &.source.to_string()))]
pub struct LocatedMatrixError {
    pub line: Option<usize>,
    pub source: MatrixError,
}

/// Validates the spec's matrix; row-specific failures point at the row's
/// line, column and shape failures at the `matrix` directive.
pub fn validate_matrix(
    spec: &ChainSpec,
    locs: &SpecLocations,
) -> Result<StochasticMatrix, LocatedMatrixError> {
    validate_stochastic(spec.matrix.clone()).map_err(|source| {
        let line = match &source {
            MatrixError::NegativeEntry { row, .. } => locs.rows.get(*row).copied(),
            _ => Some(locs.matrix).filter(|&l| l > 0),
        };
        LocatedMatrixError { line, source }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn parses_reference_spec() {
        let (spec, locs) = parse_with_locations(REFERENCE_SPEC).unwrap();
        assert_eq!(
            spec.matrix,
            Matrix::from_rows(&[[0.8, 0.1], [0.2, 0.9]]).unwrap()
        );
        let names: Vec<&str> = spec.initials.iter().map(|i| i.name.as_str()).collect();
        assert_eq!(names, ["p", "q", "r", "s"]);
        assert_eq!(spec.initials[1].state, v(&[-6.0, 6.0]));
        assert_eq!(spec.initials[3].state, v(&[-5.0, -4.0]));
        assert_eq!((spec.random_initials, spec.steps, spec.seed), (2, 15, 0));
        assert_eq!(locs.matrix, 3);
        assert_eq!(locs.rows, vec![4, 5]);
    }

    #[test]
    fn empty_input_is_missing_matrix() {
        let err = parse_chain_spec("").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: None,
                message: "missing matrix directive".into()
            }
        );
        assert!(parse_chain_spec("# only a comment\n\n").is_err());
    }

    #[test]
    fn row_arity_is_checked() {
        let err = parse_chain_spec("matrix 2 2\n0.5 0.5 0.0\n0.5 0.5\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: Some(2),
                message: "expected 2 values".into()
            }
        );
    }

    #[test]
    fn defaults_apply() {
        let spec = parse_chain_spec("matrix 1 1\n1\n").unwrap();
        assert_eq!((spec.random_initials, spec.steps, spec.seed), (0, 15, 0));
        assert!(spec.initials.is_empty());
    }

    #[test]
    fn duplicates_are_errors() {
        let base = "matrix 1 1\n1\n";
        for extra in [
            "steps 3\nsteps 4\n",
            "seed 1\nseed 1\n",
            "random 1\nrandom 2\n",
        ] {
            let err = parse_chain_spec(&format!("{base}{extra}")).unwrap_err();
            assert!(
                matches!(err, ParseError::DuplicateKey { line: 4, .. }),
                "{err}"
            );
        }
        let err = parse_chain_spec("matrix 1 1\n1\nmatrix 1 1\n1\n").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateKey { line: 3, .. }));
        let err = parse_chain_spec("matrix 1 1\n1\ninitial a 1\ninitial a 2\n").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateKey { line: 4, .. }));
    }

    #[test]
    fn dimension_and_directive_errors() {
        let err = parse_chain_spec("initial p 1 2 3\nmatrix 2 2\n1 0\n0 1\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::DimensionMismatch {
                line: 1,
                expected: 2,
                found: 3
            }
        );
        let err = parse_chain_spec("matrix 1 1\n1\nvector 3\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownDirective {
                line: 3,
                directive: "vector".into()
            }
        );
    }

    #[test]
    fn rejects_malformed_values() {
        for text in [
            "matrix 1 1\nnan\n",
            "matrix 1 1\ninf\n",
            "matrix 0 1\n",
            "matrix 2\n",
            "matrix 1 1\n1\nsteps 0\n",
            "matrix 1 1\n1\nsteps 1.5\n",
            "matrix 1 1\n1\nseed -1\n",
            "matrix 1 1\n1\ninitial 9p 1\n",
            "matrix 1 1\n1\ninitial p\n",
            "matrix 2 2\n1 0\n",
        ] {
            assert!(
                matches!(parse_chain_spec(text), Err(ParseError::Syntax { .. })),
                "{text:?}"
            );
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "\n# header\nmatrix 1 1 # trailing\n\n  1   # row\nsteps 2\n";
        let spec = parse_chain_spec(text).unwrap();
        assert_eq!(spec.steps, 2);
    }

    #[test]
    fn names() {
        assert!(is_valid_name("p"));
        assert!(is_valid_name("x_10"));
        assert!(!is_valid_name("_x"));
        assert!(!is_valid_name("1x"));
        assert!(!is_valid_name(""));
        assert!(!is_valid_name("a-b"));
    }

    #[test]
    fn serialize_reference_round_trips() {
        let spec = parse_chain_spec(REFERENCE_SPEC).unwrap();
        let text = serialize_chain_spec(&spec);
        assert_eq!(
            text,
            "matrix 2 2\n0.8 0.1\n0.2 0.9\ninitial p 2 4\ninitial q -6 6\n\
             initial r 7 2\ninitial s -5 -4\nrandom 2\nsteps 15\n"
        );
        assert_eq!(parse_chain_spec(&text).unwrap(), spec);
    }

    #[test]
    fn serialize_seed_and_random() {
        let mut spec = parse_chain_spec("matrix 1 1\n1\n").unwrap();
        spec.seed = 42;
        spec.random_initials = 2;
        let text = serialize_chain_spec(&spec);
        assert!(text.lines().any(|l| l == "random 2"));
        assert!(text.lines().any(|l| l == "seed 42"));
    }

    #[test]
    fn minimal_spec_is_three_lines() {
        let spec = parse_chain_spec("matrix 1 1\n1\n").unwrap();
        assert_eq!(serialize_chain_spec(&spec), "matrix 1 1\n1\nsteps 15\n");
    }

    #[test]
    fn validation_errors_carry_lines() {
        let text = "# c\nmatrix 2 2\n0.8 0.1\n0.3 0.9\n";
        let (spec, locs) = parse_with_locations(text).unwrap();
        let err = validate_matrix(&spec, &locs).unwrap_err();
        assert_eq!(err.line, Some(2));
        assert!(matches!(
            err.source,
            MatrixError::ColumnSumViolation { col: 0, .. }
        ));
        assert!(err.to_string().starts_with("line 2: column 0"));

        let text = "matrix 2 2\n1.2 0\n-0.2 1\n";
        let (spec, locs) = parse_with_locations(text).unwrap();
        assert_eq!(validate_matrix(&spec, &locs).unwrap_err().line, Some(3));
    }
}
