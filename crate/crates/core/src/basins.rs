//! Domains of attraction of tensor power iteration on the unit circle
//! (`n = 2`) and the unit sphere (`n = 3`).
//!
//! Each grid cell is started at its centre, iterated with [`tpi_run`] and
//! labelled with the limit index `2 · pair + negated` of the eigenvector it
//! reaches. Cells are processed in parallel and assembled in index order, so
//! the output depends only on the inputs.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::dynamics::{tpi_run, TpiOptions, TpiStatus};
use crate::eigenstructure::{enumerate_eigenpairs, EigenStructure};
use crate::output::float;
use crate::{Error, Result, SimplexTensor};

/// Smallest accepted resolution along any grid axis.
pub const MIN_RESOLUTION: usize = 16;

/// Start-point layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parametrization {
    /// Angles `θ_i = 2πi / resolution` on the unit circle.
    Circle { resolution: usize },
    /// Latitude–longitude cell centres: polar angle
    /// `θ_i = π(i + 1/2) / res_theta` (rows) and azimuth
    /// `φ_j = 2π(j + 1/2) / res_phi` (columns).
    Sphere { res_theta: usize, res_phi: usize },
}

impl Parametrization {
    pub fn dim(&self) -> usize {
        match self {
            Parametrization::Circle { .. } => 2,
            Parametrization::Sphere { .. } => 3,
        }
    }

    pub fn cell_count(&self) -> usize {
        match *self {
            Parametrization::Circle { resolution } => resolution,
            Parametrization::Sphere { res_theta, res_phi } => res_theta * res_phi,
        }
    }

    /// `(width, height)` of the raster image.
    pub fn raster_size(&self) -> (usize, usize) {
        match *self {
            Parametrization::Circle { resolution } => (resolution, 1),
            Parametrization::Sphere { res_theta, res_phi } => (res_phi, res_theta),
        }
    }

    /// Grid angles of a cell: `(θ, None)` on the circle, `(θ, Some(φ))` on
    /// the sphere.
    pub fn angles(&self, index: usize) -> (f64, Option<f64>) {
        match *self {
            Parametrization::Circle { resolution } => (2.0 * PI * index as f64 / resolution as f64, None),
            Parametrization::Sphere { res_theta, res_phi } => {
                let (i, j) = (index / res_phi, index % res_phi);
                let theta = PI * (i as f64 + 0.5) / res_theta as f64;
                let phi = 2.0 * PI * (j as f64 + 0.5) / res_phi as f64;
                (theta, Some(phi))
            }
        }
    }

    /// Unit start vector of a cell.
    pub fn start_point(&self, index: usize) -> DVector<f64> {
        match self.angles(index) {
            (theta, None) => DVector::from_vec(vec![theta.cos(), theta.sin()]),
            (theta, Some(phi)) => DVector::from_vec(vec![
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ]),
        }
    }

    fn validate(&self) -> Result<()> {
        let smallest = match *self {
            Parametrization::Circle { resolution } => resolution,
            Parametrization::Sphere { res_theta, res_phi } => res_theta.min(res_phi),
        };
        if smallest < MIN_RESOLUTION {
            return Err(Error::InvalidInput(format!(
                "resolution must be at least {MIN_RESOLUTION}, got {smallest}"
            )));
        }
        Ok(())
    }
}

/// Where the iteration from one cell ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellOutcome {
    /// Converged onto the enumerated eigenvector with this limit index.
    Limit(usize),
    /// Converged, but not onto an isolated enumerated eigenvector. This is
    /// what every cell reports when the whole sphere consists of eigenvectors.
    Unmatched,
    /// No convergence within the iteration budget.
    Unresolved,
    /// The iteration hit `T x^{d-1} = 0`.
    MapUndefined,
}

impl CellOutcome {
    pub fn status(&self) -> &'static str {
        match self {
            CellOutcome::Limit(_) => "converged",
            CellOutcome::Unmatched => "unmatched",
            CellOutcome::Unresolved => "unresolved",
            CellOutcome::MapUndefined => "map_undefined",
        }
    }

    pub fn limit_index(&self) -> Option<usize> {
        match self {
            CellOutcome::Limit(i) => Some(*i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub outcome: CellOutcome,
    pub iterations: usize,
}

/// Rasterized basins of attraction.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinMap {
    pub n: usize,
    pub d: usize,
    pub parametrization: Parametrization,
    /// Row-major cells; for the sphere, row `i` is polar angle `θ_i`.
    pub cells: Vec<Cell>,
    /// The eigenstructure whose pairs the limit indices refer to.
    pub structure: EigenStructure,
}

impl BasinMap {
    /// Distinct limit indices, ascending.
    pub fn limits(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.cells.iter().filter_map(|c| c.outcome.limit_index()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Fraction of cells that converged (matched or not).
    pub fn converged_fraction(&self) -> f64 {
        let converged = self
            .cells
            .iter()
            .filter(|c| matches!(c.outcome, CellOutcome::Limit(_) | CellOutcome::Unmatched))
            .count();
        converged as f64 / self.cells.len() as f64
    }

    /// The unit vector behind a limit index.
    pub fn limit_vector(&self, limit_index: usize) -> Option<DVector<f64>> {
        let pair = self.structure.pairs().get(limit_index / 2)?;
        Some(if limit_index % 2 == 1 {
            -&pair.vector
        } else {
            pair.vector.clone()
        })
    }
}

/// Runs TPI from every cell centre of `parametrization` for the regular
/// simplex tensor of order `d` in dimension `n ∈ {2, 3}`.
pub fn rasterize(n: usize, d: usize, parametrization: Parametrization, options: TpiOptions) -> Result<BasinMap> {
    if parametrization.dim() != n {
        return Err(Error::InvalidInput(format!(
            "basins need n = 2 (circle) or n = 3 (sphere), got n = {n} with a {}-dimensional grid",
            parametrization.dim()
        )));
    }
    parametrization.validate()?;
    let tensor = SimplexTensor::regular(n, d)?;
    let structure = enumerate_eigenpairs(n, d)?;
    let cells = (0..parametrization.cell_count())
        .into_par_iter()
        .map(|index| {
            let start = parametrization.start_point(index);
            let run = tpi_run(&tensor, Some(&structure), &start, options)?;
            let outcome = match (run.status, run.matched) {
                (TpiStatus::Converged, Some(m)) => CellOutcome::Limit(m.limit_index()),
                (TpiStatus::Converged, None) => CellOutcome::Unmatched,
                (TpiStatus::MaxIterations, _) => CellOutcome::Unresolved,
                (TpiStatus::MapUndefined, _) => CellOutcome::MapUndefined,
            };
            Ok(Cell {
                outcome,
                iterations: run.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasinMap {
        n,
        d,
        parametrization,
        cells,
        structure,
    })
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let sector = (h * 6.0).floor();
    let f = h * 6.0 - sector;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - f * s), v * (1.0 - (1.0 - f) * s));
    let (r, g, b) = match sector as i64 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [r, g, b].map(|c| (c * 255.0).round() as u8)
}

/// Colour of a cell. Limit indices walk the hue circle by the golden angle,
/// so nearby indices get well separated colours.
pub fn palette(outcome: CellOutcome) -> [u8; 3] {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    match outcome {
        CellOutcome::Limit(i) => hsv_to_rgb((i as f64 * GOLDEN).fract(), 0.8, 0.95),
        CellOutcome::Unmatched => [128, 128, 128],
        CellOutcome::Unresolved => [0, 0, 0],
        CellOutcome::MapUndefined => [255, 255, 255],
    }
}

fn write_ppm(path: &Path, width: usize, height: usize, pixels: &[[u8; 3]]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P6\n{width} {height}\n255\n")?;
    for p in pixels {
        out.write_all(p)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the map as a binary PPM: a `resolution × 1` strip for the circle
/// and a `res_phi × res_theta` equirectangular image for the sphere.
pub fn write_image(map: &BasinMap, path: &Path) -> Result<()> {
    let (width, height) = map.parametrization.raster_size();
    let pixels: Vec<[u8; 3]> = map.cells.iter().map(|c| palette(c.outcome)).collect();
    write_ppm(path, width, height, &pixels)
}

/// Renders a circle map as a `size × size` annulus: each pixel between radii
/// `0.25·size` and `0.5·size` takes the colour of the cell at its angle.
pub fn write_disk_image(map: &BasinMap, path: &Path, size: usize) -> Result<()> {
    let Parametrization::Circle { resolution } = map.parametrization else {
        return Err(Error::InvalidInput("disk rendering needs a circle map".into()));
    };
    let centre = size as f64 / 2.0;
    let mut pixels = Vec::with_capacity(size * size);
    for row in 0..size {
        for col in 0..size {
            let x = col as f64 + 0.5 - centre;
            let y = centre - (row as f64 + 0.5);
            let r = x.hypot(y);
            if r < 0.25 * size as f64 || r > 0.5 * size as f64 {
                pixels.push([64, 64, 64]);
                continue;
            }
            let angle = y.atan2(x).rem_euclid(2.0 * PI);
            let cell = ((angle / (2.0 * PI) * resolution as f64).round() as usize) % resolution;
            pixels.push(palette(map.cells[cell].outcome));
        }
    }
    write_ppm(path, size, size, &pixels)
}

/// Sidecar table: `index, coord1[, coord2], limit_index, iterations, status`,
/// where the coordinates are the grid angles and `limit_index` is empty for
/// cells without an enumerated limit.
pub fn write_csv(map: &BasinMap, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    let sphere = matches!(map.parametrization, Parametrization::Sphere { .. });
    let mut header = vec!["index", "coord1"];
    if sphere {
        header.push("coord2");
    }
    header.extend(["limit_index", "iterations", "status"]);
    writer.write_record(&header).map_err(csv_error)?;
    for (index, cell) in map.cells.iter().enumerate() {
        let (theta, phi) = map.parametrization.angles(index);
        let mut record = vec![index.to_string(), float(theta)];
        if let Some(phi) = phi {
            record.push(float(phi));
        }
        record.push(cell.outcome.limit_index().map(|i| i.to_string()).unwrap_or_default());
        record.push(cell.iterations.to_string());
        record.push(cell.outcome.status().to_string());
        writer.write_record(&record).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use nalgebra::Matrix2;

    use super::*;
    use crate::dynamics::{classify_all, Classification, RobustnessClass};

    fn circle(resolution: usize) -> Parametrization {
        Parametrization::Circle { resolution }
    }

    #[test]
    fn start_points_are_unit_vectors() {
        let sphere = Parametrization::Sphere { res_theta: 16, res_phi: 32 };
        for index in [0, 17, 511] {
            assert!((sphere.start_point(index).norm() - 1.0).abs() < 1e-15);
        }
        assert_eq!(sphere.raster_size(), (32, 16));
        assert!(circle(20).start_point(5)[0].abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        let opts = TpiOptions::default();
        assert!(rasterize(2, 7, circle(8), opts).is_err());
        assert!(rasterize(3, 7, circle(64), opts).is_err());
        assert!(rasterize(4, 7, circle(64), opts).is_err());
    }

    #[test]
    fn n2_d7_has_six_basins() {
        let map = rasterize(2, 7, circle(4096), TpiOptions::default()).unwrap();
        assert_eq!(map.limits().len(), 6);
        assert!(map.converged_fraction() >= 0.999);
        let centres: Vec<DVector<f64>> = map.limits().iter().map(|&l| map.limit_vector(l).unwrap()).collect();
        let frame = crate::SimplexFrame::new(2).unwrap();
        for k in 0..3 {
            for sign in [1.0, -1.0] {
                let v = frame.vector(k) * sign;
                assert!(centres.iter().any(|c| (c - &v).norm() < 1e-10));
            }
        }
    }

    #[test]
    fn vertex_cell_maps_to_vertex() {
        let map = rasterize(2, 7, circle(4096), TpiOptions::default()).unwrap();
        let frame = crate::SimplexFrame::new(2).unwrap();
        let v = frame.vector(0);
        let angle = v[1].atan2(v[0]).rem_euclid(2.0 * PI);
        let cell = (angle / (2.0 * PI) * 4096.0).round() as usize % 4096;
        let limit = map.cells[cell].outcome.limit_index().unwrap();
        assert!((map.limit_vector(limit).unwrap() - v).norm() < 1e-10);
    }

    #[test]
    fn rotation_symmetry() {
        for d in [5, 6, 7, 8] {
            let resolution = 3 * 200;
            let map = rasterize(2, d, circle(resolution), TpiOptions::default()).unwrap();
            let (c, s) = ((2.0 * PI / 3.0).cos(), (2.0 * PI / 3.0).sin());
            let rotation = Matrix2::new(c, -s, s, c);
            let image = |l: usize| {
                let w = map.limit_vector(l).unwrap();
                let rotated = DVector::from_iterator(2, (rotation * nalgebra::Vector2::new(w[0], w[1])).iter().copied());
                let (pair, dist, negated) = map.structure.nearest_line(&rotated).unwrap();
                assert!(dist < 1e-10);
                2 * pair + usize::from(negated)
            };
            let shift = resolution / 3;
            let boundary = |i: usize| {
                let prev = map.cells[(i + resolution - 1) % resolution].outcome;
                let next = map.cells[(i + 1) % resolution].outcome;
                prev != map.cells[i].outcome || next != map.cells[i].outcome
            };
            for i in 0..resolution {
                let j = (i + shift) % resolution;
                if boundary(i) || boundary(j) {
                    continue;
                }
                let here = map.cells[i].outcome.limit_index().unwrap();
                let there = map.cells[j].outcome.limit_index().unwrap();
                assert_eq!(image(here), there, "d={d} cell {i}");
            }
        }
    }

    #[test]
    fn limits_are_robust() {
        for (n, d, grid) in [
            (2, 6, circle(512)),
            (3, 6, Parametrization::Sphere { res_theta: 32, res_phi: 64 }),
            (3, 7, Parametrization::Sphere { res_theta: 32, res_phi: 64 }),
        ] {
            let map = rasterize(n, d, grid, TpiOptions::default()).unwrap();
            let Classification::Discrete { records, .. } = classify_all(n, d).unwrap() else {
                panic!("continuum")
            };
            let robust: HashSet<usize> = records
                .iter()
                .enumerate()
                .filter(|(_, r)| r.class == RobustnessClass::Robust)
                .map(|(i, _)| i)
                .collect();
            // a cell centred exactly on a repelling eigenvector is already a
            // fixed point and stops there
            let mut hit = HashSet::new();
            for (index, cell) in map.cells.iter().enumerate() {
                let Some(limit) = cell.outcome.limit_index() else { continue };
                if robust.contains(&(limit / 2)) {
                    hit.insert(limit / 2);
                } else {
                    let start = map.parametrization.start_point(index);
                    assert!((start - map.limit_vector(limit).unwrap()).norm() < 1e-12, "n={n} d={d} cell {index}");
                }
            }
            assert_eq!(hit, robust, "n={n} d={d}");
        }
    }

    #[test]
    fn continuum_cells_are_unmatched() {
        let map = rasterize(2, 4, circle(32), TpiOptions::default()).unwrap();
        assert!(map.cells.iter().all(|c| c.outcome == CellOutcome::Unmatched));
        assert!(map.limits().is_empty());
    }

    #[test]
    fn palette_distinguishes_six_limits() {
        let colours: HashSet<[u8; 3]> = (0..6).map(|i| palette(CellOutcome::Limit(i))).collect();
        assert_eq!(colours.len(), 6);
        assert!(!colours.contains(&[0, 0, 0]));
        assert!(!colours.contains(&[255, 255, 255]));
    }

    #[test]
    fn image_and_csv_files() {
        let dir = tempfile::tempdir().unwrap();
        let map = rasterize(2, 7, circle(96), TpiOptions::default()).unwrap();
        let ppm = dir.path().join("b.ppm");
        write_image(&map, &ppm).unwrap();
        let bytes = std::fs::read(&ppm).unwrap();
        assert!(bytes.starts_with(b"P6\n96 1\n255\n"));
        assert_eq!(bytes.len(), "P6\n96 1\n255\n".len() + 96 * 3);

        write_disk_image(&map, &ppm, 64).unwrap();
        assert!(std::fs::read(&ppm).unwrap().starts_with(b"P6\n64 64\n255\n"));

        let csv_path = dir.path().join("b.csv");
        write_csv(&map, &csv_path).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("index,coord1,limit_index,iterations,status"));
        assert_eq!(lines.count(), 96);

        let sphere = rasterize(3, 6, Parametrization::Sphere { res_theta: 16, res_phi: 32 }, TpiOptions::default()).unwrap();
        write_image(&sphere, &ppm).unwrap();
        assert!(std::fs::read(&ppm).unwrap().starts_with(b"P6\n32 16\n255\n"));
        write_csv(&sphere, &csv_path).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        assert!(text.starts_with("index,coord1,coord2,limit_index,iterations,status\n"));
    }
}
