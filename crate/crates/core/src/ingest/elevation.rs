//! ASCII grid elevation raster in planar meters.
//!
//! ```text
//! ncols        4
//! nrows        3
//! xllcorner    -1000.0
//! yllcorner    -500.0
//! cellsize     250.0
//! NODATA_value -9999
//! <nrows lines of ncols values, north row first>
//! ```

use crate::spatial::PlanarCoord;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("cannot read raster {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed raster: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElevationRaster {
    pub ncols: usize,
    pub nrows: usize,
    pub xll: f64,
    pub yll: f64,
    pub cellsize: f64,
    pub nodata: f64,
    /// Row-major, north row first.
    pub values: Vec<f64>,
}

const HEADER_KEYS: [&str; 6] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"];

impl ElevationRaster {
    pub fn new(
        ncols: usize,
        nrows: usize,
        xll: f64,
        yll: f64,
        cellsize: f64,
        nodata: f64,
        values: Vec<f64>,
    ) -> Result<Self, RasterError> {
        if ncols * nrows != values.len() {
            return Err(RasterError::Format(format!(
                "{ncols}x{nrows} grid but {} values",
                values.len()
            )));
        }
        if !(cellsize > 0.0 && cellsize.is_finite()) {
            return Err(RasterError::Format(format!("cellsize must be > 0 (got {cellsize})")));
        }
        Ok(Self { ncols, nrows, xll, yll, cellsize, nodata, values })
    }

    pub fn load(path: &Path) -> Result<Self, RasterError> {
        let text = std::fs::read_to_string(path).map_err(|source| RasterError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, RasterError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut header = [0f64; 6];
        for (slot, key) in header.iter_mut().zip(HEADER_KEYS) {
            let line = lines
                .next()
                .ok_or_else(|| RasterError::Format(format!("missing header {key}")))?;
            let mut parts = line.split_whitespace();
            let k = parts.next().unwrap_or_default();
            if !k.eq_ignore_ascii_case(key) {
                return Err(RasterError::Format(format!("expected header {key}, found {k:?}")));
            }
            *slot = parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| RasterError::Format(format!("bad value for {key}")))?;
        }
        let values = lines
            .flat_map(str::split_whitespace)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| RasterError::Format(format!("bad cell value {v:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if header[0] < 0.0 || header[1] < 0.0 || header[0].fract() != 0.0 || header[1].fract() != 0.0 {
            return Err(RasterError::Format("ncols/nrows must be non-negative integers".into()));
        }
        Self::new(
            header[0] as usize,
            header[1] as usize,
            header[2],
            header[3],
            header[4],
            header[5],
            values,
        )
    }

    pub fn to_ascii(&self) -> String {
        let mut s = format!(
            "ncols {}\nnrows {}\nxllcorner {}\nyllcorner {}\ncellsize {}\nNODATA_value {}\n",
            self.ncols, self.nrows, self.xll, self.yll, self.cellsize, self.nodata
        );
        for row in self.values.chunks(self.ncols.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Grid cell containing `p`, as (row from north, column). Cells are
    /// half-open: `col = floor((x - xll) / cellsize)`.
    pub fn cell_of(&self, p: PlanarCoord) -> Option<(usize, usize)> {
        let cx = ((p.x - self.xll) / self.cellsize).floor();
        let cy = ((p.y - self.yll) / self.cellsize).floor();
        if !(cx >= 0.0 && cy >= 0.0 && cx < self.ncols as f64 && cy < self.nrows as f64) {
            return None;
        }
        let row_from_south = cy as usize;
        Some((self.nrows - 1 - row_from_south, cx as usize))
    }

    /// Value of the cell containing `p`; `None` outside the extent or on nodata.
    pub fn sample(&self, p: PlanarCoord) -> Option<f64> {
        let (r, c) = self.cell_of(p)?;
        let v = self.values[r * self.ncols + c];
        if v == self.nodata || !v.is_finite() {
            None
        } else {
            Some(v)
        }
    }
}
