//! Free-format MPS reader and writer for mixed-integer QPs.
//!
//! Sections: `NAME`, `OBJSENSE`, `ROWS`, `COLUMNS` (with `MARKER INTORG/INTEND`
//! around integer columns), `RHS`, `BOUNDS`, `QUADOBJ`, `ENDATA`. Numbers are
//! written in shortest round-trip form so a parse reproduces every coefficient
//! bit for bit. `QUADOBJ` lists the lower triangle of `Q` in `½xᵀQx`.

use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowType {
    Objective,
    Equal,
    Less,
    Greater,
}

impl RowType {
    fn code(self) -> &'static str {
        match self {
            RowType::Objective => "N",
            RowType::Equal => "E",
            RowType::Less => "L",
            RowType::Greater => "G",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    Upper,
    Lower,
    Fixed,
    Free,
    Binary,
}

impl BoundKind {
    fn code(self) -> &'static str {
        match self {
            BoundKind::Upper => "UP",
            BoundKind::Lower => "LO",
            BoundKind::Fixed => "FX",
            BoundKind::Free => "FR",
            BoundKind::Binary => "BV",
        }
    }

    fn has_value(self) -> bool {
        !matches!(self, BoundKind::Free | BoundKind::Binary)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub kind: BoundKind,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsColumn {
    pub name: String,
    pub integer: bool,
}

/// In-memory model. Row 0 is the objective.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MpsModel {
    pub name: String,
    pub rows: Vec<(String, RowType)>,
    pub columns: Vec<MpsColumn>,
    /// `(row, col, value)` in column-major order.
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<(usize, f64)>,
    pub bounds: Vec<Bound>,
    /// Lower-triangle `(i, j, q_ij)` with `i ≥ j`.
    pub quad: Vec<(usize, usize, f64)>,
}

impl MpsModel {
    pub fn num_integer(&self) -> usize {
        self.columns.iter().filter(|c| c.integer).count()
    }

    /// Dense constraint matrix (objective row excluded).
    pub fn constraint_matrix(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.rows.len().saturating_sub(1), self.columns.len());
        for &(r, c, v) in &self.entries {
            if r > 0 {
                m[(r - 1, c)] = v;
            }
        }
        m
    }

    pub fn to_mps_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME {}", self.name);
        let _ = writeln!(out, "OBJSENSE\n    MIN");
        out.push_str("ROWS\n");
        for (name, ty) in &self.rows {
            let _ = writeln!(out, " {} {}", ty.code(), name);
        }
        out.push_str("COLUMNS\n");
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.columns.len()];
        for &(r, c, v) in &self.entries {
            by_col[c].push((r, v));
        }
        let mut in_int = false;
        let mut marker = 0;
        for (c, col) in self.columns.iter().enumerate() {
            if col.integer != in_int {
                let tag = if col.integer { "'INTORG'" } else { "'INTEND'" };
                let _ = writeln!(out, "    MARKER{marker} 'MARKER' {tag}");
                marker += 1;
                in_int = col.integer;
            }
            if by_col[c].is_empty() {
                // keep the column declared even without coefficients
                let _ = writeln!(out, "    {} {} {:?}", col.name, self.rows[0].0, 0.0f64);
            }
            for &(r, v) in &by_col[c] {
                let _ = writeln!(out, "    {} {} {:?}", col.name, self.rows[r].0, v);
            }
        }
        if in_int {
            let _ = writeln!(out, "    MARKER{marker} 'MARKER' 'INTEND'");
        }
        out.push_str("RHS\n");
        for &(r, v) in &self.rhs {
            let _ = writeln!(out, "    RHS {} {:?}", self.rows[r].0, v);
        }
        out.push_str("BOUNDS\n");
        for b in &self.bounds {
            if b.kind.has_value() {
                let _ = writeln!(out, " {} BND {} {:?}", b.kind.code(), self.columns[b.col].name, b.value);
            } else {
                let _ = writeln!(out, " {} BND {}", b.kind.code(), self.columns[b.col].name);
            }
        }
        if !self.quad.is_empty() {
            out.push_str("QUADOBJ\n");
            for &(i, j, v) in &self.quad {
                let _ = writeln!(out, "    {} {} {:?}", self.columns[i].name, self.columns[j].name, v);
            }
        }
        out.push_str("ENDATA\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("MPS line {line}: {message}")]
pub struct MpsError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objsense,
    Rows,
    Columns,
    Rhs,
    Bounds,
    Quad,
}

pub fn parse_mps(text: &str) -> Result<MpsModel, MpsError> {
    use std::collections::HashMap;
    let mut model = MpsModel::default();
    let mut row_ix: HashMap<String, usize> = HashMap::new();
    let mut col_ix: HashMap<String, usize> = HashMap::new();
    let mut section = Section::None;
    let mut integer = false;
    let mut ended = false;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let err = |message: String| MpsError { line, message };
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') {
            section = match tokens[0] {
                "NAME" => {
                    model.name = tokens.get(1).unwrap_or(&"").to_string();
                    Section::None
                }
                "OBJSENSE" => Section::Objsense,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "QUADOBJ" => Section::Quad,
                "ENDATA" => {
                    ended = true;
                    break;
                }
                other => return Err(err(format!("unknown section {other}"))),
            };
            continue;
        }
        let num = |s: &str| f64::from_str(s).map_err(|_| err(format!("invalid number {s:?}")));
        let row = |s: &str| row_ix.get(s).copied().ok_or_else(|| err(format!("unknown row {s}")));
        let col = |s: &str| col_ix.get(s).copied().ok_or_else(|| err(format!("unknown column {s}")));
        match section {
            Section::Objsense => {
                if tokens[0] != "MIN" {
                    return Err(err(format!("unsupported objective sense {}", tokens[0])));
                }
            }
            Section::Rows => {
                let ty = match tokens[0] {
                    "N" => RowType::Objective,
                    "E" => RowType::Equal,
                    "L" => RowType::Less,
                    "G" => RowType::Greater,
                    t => return Err(err(format!("unknown row type {t}"))),
                };
                let name = tokens.get(1).ok_or_else(|| err("missing row name".into()))?;
                row_ix.insert(name.to_string(), model.rows.len());
                model.rows.push((name.to_string(), ty));
            }
            Section::Columns => {
                if tokens.get(1) == Some(&"'MARKER'") {
                    integer = match tokens.get(2) {
                        Some(&"'INTORG'") => true,
                        Some(&"'INTEND'") => false,
                        _ => return Err(err("malformed marker".into())),
                    };
                    continue;
                }
                if tokens.len() < 3 || tokens.len().is_multiple_of(2) {
                    return Err(err("expected column name followed by row/value pairs".into()));
                }
                let c = match col_ix.get(tokens[0]) {
                    Some(&c) => c,
                    None => {
                        col_ix.insert(tokens[0].to_string(), model.columns.len());
                        model.columns.push(MpsColumn { name: tokens[0].to_string(), integer });
                        model.columns.len() - 1
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let r = row(pair[0])?;
                    let v = num(pair[1])?;
                    if !(r == 0 && v == 0.0 && v.is_sign_positive()) {
                        model.entries.push((r, c, v));
                    }
                }
            }
            Section::Rhs => {
                for pair in tokens[1..].chunks(2) {
                    if pair.len() != 2 {
                        return Err(err("dangling RHS entry".into()));
                    }
                    model.rhs.push((row(pair[0])?, num(pair[1])?));
                }
            }
            Section::Bounds => {
                let kind = match tokens[0] {
                    "UP" => BoundKind::Upper,
                    "LO" => BoundKind::Lower,
                    "FX" => BoundKind::Fixed,
                    "FR" => BoundKind::Free,
                    "BV" => BoundKind::Binary,
                    k => return Err(err(format!("unknown bound type {k}"))),
                };
                let c = col(tokens.get(2).ok_or_else(|| err("missing bound column".into()))?)?;
                let value = if kind.has_value() {
                    num(tokens.get(3).ok_or_else(|| err("missing bound value".into()))?)?
                } else {
                    0.0
                };
                model.bounds.push(Bound { kind, col: c, value });
            }
            Section::Quad => {
                if tokens.len() != 3 {
                    return Err(err("QUADOBJ entries need two columns and a value".into()));
                }
                model.quad.push((col(tokens[0])?, col(tokens[1])?, num(tokens[2])?));
            }
            Section::None => return Err(err("data outside of a section".into())),
        }
    }
    if !ended {
        return Err(MpsError { line: text.lines().count(), message: "missing ENDATA".into() });
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MpsModel {
        MpsModel {
            name: "toy".into(),
            rows: vec![("OBJ".into(), RowType::Objective), ("R1".into(), RowType::Less), ("R2".into(), RowType::Equal)],
            columns: vec![
                MpsColumn { name: "X".into(), integer: false },
                MpsColumn { name: "B".into(), integer: true },
                MpsColumn { name: "Y".into(), integer: false },
            ],
            entries: vec![(0, 0, 1.0), (1, 0, 0.1 + 0.2), (1, 1, -1e3), (2, 2, 1.0 / 3.0)],
            rhs: vec![(1, 5e-324), (2, -7.25)],
            bounds: vec![
                Bound { kind: BoundKind::Free, col: 0, value: 0.0 },
                Bound { kind: BoundKind::Binary, col: 1, value: 0.0 },
                Bound { kind: BoundKind::Upper, col: 2, value: 1e300 },
            ],
            quad: vec![(0, 0, 2.0), (2, 0, -0.7)],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let text = m.to_mps_string();
        let back = parse_mps(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.num_integer(), 1);
        assert_eq!(back.to_mps_string(), text);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "NAME x\nROWS\n N OBJ\nCOLUMNS\n    X OBJ abc\nENDATA\n";
        let e = parse_mps(text).unwrap_err();
        assert_eq!(e.line, 5);
    }
}
