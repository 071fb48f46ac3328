use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, Error, Result};
use crate::Scalar;

/// An `n`-row sample `(X, Y, Z)`, optionally with the latent `(U, V)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T: Scalar> {
    x: DMatrix<T>,
    y: DVector<T>,
    z: DMatrix<T>,
    u: Option<DVector<T>>,
    v: Option<DMatrix<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(x: DMatrix<T>, y: DVector<T>, z: DMatrix<T>) -> Result<Self> {
        let n = x.nrows();
        if y.len() != n || z.nrows() != n {
            return Err(dim_err(format!(
                "row counts differ: X {}, Y {}, Z {}",
                n,
                y.len(),
                z.nrows()
            )));
        }
        Ok(Self { x, y, z, u: None, v: None })
    }

    pub fn with_latents(
        x: DMatrix<T>,
        y: DVector<T>,
        z: DMatrix<T>,
        u: DVector<T>,
        v: DMatrix<T>,
    ) -> Result<Self> {
        let mut d = Self::new(x, y, z)?;
        if u.len() != d.n() || v.shape() != d.x.shape() {
            return Err(dim_err("latent U, V do not match X".to_string()));
        }
        d.u = Some(u);
        d.v = Some(v);
        Ok(d)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn r(&self) -> usize {
        self.z.ncols()
    }

    pub fn x(&self) -> &DMatrix<T> {
        &self.x
    }

    pub fn y(&self) -> &DVector<T> {
        &self.y
    }

    pub fn z(&self) -> &DMatrix<T> {
        &self.z
    }

    pub fn u(&self) -> Option<&DVector<T>> {
        self.u.as_ref()
    }

    pub fn v(&self) -> Option<&DMatrix<T>> {
        self.v.as_ref()
    }

    /// Sub-sample with the given row indices (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.n()) {
            return Err(dim_err(format!("row {bad} out of range for {} rows", self.n())));
        }
        Ok(Self {
            x: self.x.select_rows(rows),
            y: self.y.select_rows(rows),
            z: self.z.select_rows(rows),
            u: self.u.as_ref().map(|u| u.select_rows(rows)),
            v: self.v.as_ref().map(|v| v.select_rows(rows)),
        })
    }

    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = (1..=self.p()).map(|j| format!("x{j}")).collect();
        h.push("y".into());
        h.extend((1..=self.r()).map(|j| format!("z{j}")));
        if self.u.is_some() {
            h.push("u".into());
            h.extend((1..=self.p()).map(|j| format!("v{j}")));
        }
        h
    }

    /// Writes the dataset as CSV with header `x1..xp,y,z1..zr[,u,v1..vp]`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.header())?;
        let fmt = |v: T| format!("{:.16e}", v.as_f64());
        for i in 0..self.n() {
            let mut rec: Vec<String> = self.x.row(i).iter().map(|&v| fmt(v)).collect();
            rec.push(fmt(self.y[i]));
            rec.extend(self.z.row(i).iter().map(|&v| fmt(v)));
            if let (Some(u), Some(v)) = (&self.u, &self.v) {
                rec.push(fmt(u[i]));
                rec.extend(v.row(i).iter().map(|&e| fmt(e)));
            }
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads a CSV written by [`Dataset::write_csv`]. Columns may appear in any
    /// order; `u` and `v*` are optional but must come together.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut xs = Vec::new();
        let mut zs = Vec::new();
        let mut vs = Vec::new();
        let mut y_col = None;
        let mut u_col = None;
        for (c, name) in headers.iter().enumerate() {
            let name = name.trim();
            let indexed = |prefix: char| -> Option<usize> {
                name.strip_prefix(prefix)
                    .and_then(|rest| rest.parse::<usize>().ok())
                    .filter(|&j| j >= 1)
            };
            match name {
                "y" => y_col = Some(c),
                "u" => u_col = Some(c),
                _ => {
                    if let Some(j) = indexed('x') {
                        xs.push((j, c));
                    } else if let Some(j) = indexed('z') {
                        zs.push((j, c));
                    } else if let Some(j) = indexed('v') {
                        vs.push((j, c));
                    } else {
                        return Err(Error::InvalidInput(format!("unexpected column '{name}'")));
                    }
                }
            }
        }
        let y_col = y_col.ok_or_else(|| Error::InvalidInput("missing column 'y'".into()))?;
        for (label, cols) in [("x", &mut xs), ("z", &mut zs), ("v", &mut vs)] {
            cols.sort_unstable();
            if cols.iter().enumerate().any(|(i, &(j, _))| j != i + 1) {
                return Err(Error::InvalidInput(format!("{label} columns are not numbered 1..")));
            }
        }
        let latents = u_col.is_some() || !vs.is_empty();
        if latents && (u_col.is_none() || vs.len() != xs.len()) {
            return Err(Error::InvalidInput("latent columns u, v1..vp must appear together".into()));
        }

        let mut rows: Vec<Vec<T>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    cell.trim().parse::<f64>().map(T::lit).map_err(|_| {
                        Error::InvalidInput(format!(
                            "non-numeric cell '{cell}' at data row {}, column {}",
                            line + 1,
                            c + 1
                        ))
                    })
                })
                .collect::<Result<Vec<T>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        let take = |cols: &[(usize, usize)]| {
            DMatrix::from_fn(n, cols.len(), |i, j| rows[i][cols[j].1])
        };
        let x = take(&xs);
        let z = take(&zs);
        let y = DVector::from_fn(n, |i, _| rows[i][y_col]);
        match u_col {
            Some(uc) => {
                let u = DVector::from_fn(n, |i, _| rows[i][uc]);
                Self::with_latents(x, y, z, u, take(&vs))
            }
            None => Self::new(x, y, z),
        }
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}
