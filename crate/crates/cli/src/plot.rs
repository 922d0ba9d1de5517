//! SVG renderings of run outputs. Plots only read CSVs listed in a manifest;
//! nothing is recomputed. The SVG is assembled in memory and written only if
//! every input is usable, so a failed plot leaves no file behind.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{CliError, CliResult};
use crate::runner::{load_manifest, Manifest, OutputEntry};

pub const FIGURES: [&str; 3] = ["fig1", "fig2", "g212"];

/// A CSV read into named numeric columns; empty cells are `None`.
#[derive(Debug, Clone)]
pub struct Columns {
    headers: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
    source: PathBuf,
}

impl Columns {
    pub fn read(path: &Path) -> CliResult<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::io(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| CliError::io(path, e))?;
            let row = record
                .iter()
                .map(|cell| {
                    if cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>().map(Some).map_err(|e| {
                            CliError::config(
                                path.display().to_string(),
                                format!("bad number {cell:?}: {e}"),
                            )
                        })
                    }
                })
                .collect::<CliResult<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(CliError::config(path.display().to_string(), "no data rows"));
        }
        Ok(Columns {
            headers,
            rows,
            source: path.to_path_buf(),
        })
    }

    pub fn column(&self, name: &str) -> CliResult<Vec<Option<f64>>> {
        let k = self.headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::config(
                name,
                format!("column missing from {}", self.source.display()),
            )
        })?;
        Ok(self
            .rows
            .iter()
            .map(|r| r.get(k).copied().flatten())
            .collect())
    }

    /// `(x, y)` pairs where both are defined.
    pub fn xy(&self, x: &str, y: &str) -> CliResult<Vec<(f64, f64)>> {
        let (xs, ys) = (self.column(x)?, self.column(y)?);
        Ok(xs
            .into_iter()
            .zip(ys)
            .filter_map(|(a, b)| Some((a?, b?)))
            .collect())
    }
}

fn bounds(points: impl IntoIterator<Item = (f64, f64)>) -> ((f64, f64), (f64, f64)) {
    let mut b = (
        (f64::INFINITY, f64::NEG_INFINITY),
        (f64::INFINITY, f64::NEG_INFINITY),
    );
    for (x, y) in points {
        b.0 = (b.0 .0.min(x), b.0 .1.max(x));
        b.1 = (b.1 .0.min(y), b.1 .1.max(y));
    }
    let widen = |(lo, hi): (f64, f64)| {
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    (widen(b.0), widen(b.1))
}

fn data_outputs<'a>(
    manifest: &'a Manifest,
    kind: &str,
    figure: &str,
) -> CliResult<Vec<&'a OutputEntry>> {
    if manifest.kind != kind {
        return Err(CliError::config(
            "figure",
            format!("{figure} needs a {kind} run, manifest is {}", manifest.kind),
        ));
    }
    let data: Vec<&OutputEntry> = manifest
        .outputs
        .iter()
        .filter(|o| o.role == "data")
        .collect();
    if data.is_empty() {
        return Err(CliError::config("manifest", "lists no data outputs"));
    }
    Ok(data)
}

fn find_role<'a>(
    manifest: &'a Manifest,
    data: &OutputEntry,
    role: &str,
) -> CliResult<&'a OutputEntry> {
    manifest
        .outputs
        .iter()
        .find(|o| o.role == role && o.params == data.params)
        .ok_or_else(|| {
            CliError::config("manifest", format!("no `{role}` output for {}", data.file))
        })
}

fn panel_label(index: usize, entry: &OutputEntry) -> String {
    let letter = (b'a' + (index % 26) as u8) as char;
    let params: Vec<String> = entry
        .params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    if params.is_empty() {
        format!("({letter})")
    } else {
        format!("({letter}) {}", params.join(", "))
    }
}

/// Side-mode population against `2 c2 t / pi`, one panel per output.
fn fig1(manifest: &Manifest, dir: &Path, out: &Path) -> CliResult<String> {
    let data = data_outputs(manifest, "fwm", "fig1")?;
    let panels: Vec<(String, Vec<(f64, f64)>)> = data
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let cols = Columns::read(&dir.join(&o.file))?;
            let pts = cols
                .xy("two_c2_t", "n1")?
                .into_iter()
                .map(|(t, n)| (t / PI, n))
                .collect();
            Ok((panel_label(i, o), pts))
        })
        .collect::<CliResult<_>>()?;

    let mut svg = String::new();
    {
        let root =
            SVGBackend::with_string(&mut svg, (900, 360 * panels.len() as u32)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| CliError::io(out, e))?;
        for (area, (label, pts)) in root.split_evenly((panels.len(), 1)).iter().zip(&panels) {
            let ((x0, x1), (_, y1)) = bounds(pts.iter().copied());
            let mut chart = ChartBuilder::on(area)
                .caption(label, ("sans-serif", 20))
                .margin(12)
                .x_label_area_size(40)
                .y_label_area_size(60)
                .build_cartesian_2d(x0..x1, 0.0..y1 * 1.05)
                .map_err(|e| CliError::io(out, e))?;
            chart
                .configure_mesh()
                .x_desc("2 c2 t / pi")
                .y_desc("<a1^dag a1>")
                .draw()
                .map_err(|e| CliError::io(out, e))?;
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), &BLUE))
                .map_err(|e| CliError::io(out, e))?;
        }
        root.present().map_err(|e| CliError::io(out, e))?;
    }
    Ok(svg)
}

/// Reconstructed intensity across the image plane with an inset comparing
/// the matched image to the original aperture.
fn fig2(manifest: &Manifest, dir: &Path, out: &Path) -> CliResult<String> {
    let data = data_outputs(manifest, "holo", "fig2")?;
    let main = data[0];
    let image = Columns::read(&dir.join(&main.file))?;
    let pts: Vec<(f64, f64)> = image
        .xy("x", "intensity")?
        .into_iter()
        .map(|(x, i)| (x * 1e6, i))
        .collect();
    let inset_entry = find_role(manifest, main, "inset")?;
    let inset = Columns::read(&dir.join(&inset_entry.file))?;
    let original: Vec<(f64, f64)> = inset
        .xy("x", "original")?
        .into_iter()
        .map(|(x, v)| (x * 1e6, v))
        .collect();
    let rebuilt: Vec<(f64, f64)> = inset
        .xy("x", "reconstructed")?
        .into_iter()
        .map(|(x, v)| (x * 1e6, v))
        .collect();

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (1000, 560)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| CliError::io(out, e))?;
        let ((x0, x1), (_, y1)) = bounds(pts.iter().copied());
        let mut chart = ChartBuilder::on(&root)
            .caption("reconstructed atomic intensity", ("sans-serif", 22))
            .margin(14)
            .x_label_area_size(44)
            .y_label_area_size(70)
            .build_cartesian_2d(x0..x1, 0.0..y1 * 1.05)
            .map_err(|e| CliError::io(out, e))?;
        chart
            .configure_mesh()
            .x_desc("x [um]")
            .y_desc("|psi|^2 [arb.]")
            .draw()
            .map_err(|e| CliError::io(out, e))?;
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), &BLACK))
            .map_err(|e| CliError::io(out, e))?;

        let area = root.clone().shrink((640, 60), (320, 220));
        area.fill(&WHITE.mix(0.9))
            .map_err(|e| CliError::io(out, e))?;
        let ((a0, a1), _) = bounds(original.iter().chain(&rebuilt).copied());
        let mut small = ChartBuilder::on(&area)
            .caption("inset: original vs reconstructed", ("sans-serif", 14))
            .margin(6)
            .x_label_area_size(28)
            .y_label_area_size(36)
            .build_cartesian_2d(a0..a1, 0.0..1.1)
            .map_err(|e| CliError::io(out, e))?;
        small
            .configure_mesh()
            .x_desc("offset [um]")
            .draw()
            .map_err(|e| CliError::io(out, e))?;
        small
            .draw_series(LineSeries::new(original.iter().copied(), &RED))
            .map_err(|e| CliError::io(out, e))?
            .label("original")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], RED));
        small
            .draw_series(LineSeries::new(rebuilt.iter().copied(), &BLUE))
            .map_err(|e| CliError::io(out, e))?
            .label("reconstructed")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], BLUE));
        small
            .configure_series_labels()
            .background_style(WHITE)
            .border_style(BLACK)
            .draw()
            .map_err(|e| CliError::io(out, e))?;
        root.present().map_err(|e| CliError::io(out, e))?;
    }
    Ok(svg)
}

/// Pairwise `g2` of the amplifier against `omega_r t` on a log scale.
fn g212(manifest: &Manifest, dir: &Path, out: &Path) -> CliResult<String> {
    let data = data_outputs(manifest, "pamp", "g212")?;
    let cols = Columns::read(&dir.join(&data[0].file))?;
    let series = [
        ("g2_am", cols.xy("omega_r_t", "g2_am")?, RED),
        ("g2_ap", cols.xy("omega_r_t", "g2_ap")?, BLUE),
        ("g2_mp", cols.xy("omega_r_t", "g2_mp")?, GREEN),
    ];
    let positive = |v: &&(f64, f64)| v.1 > 0.0;
    let ((x0, x1), (y0, y1)) = bounds(
        series
            .iter()
            .flat_map(|s| s.1.iter().filter(positive).copied()),
    );
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (900, 520)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| CliError::io(out, e))?;
        let mut chart = ChartBuilder::on(&root)
            .caption("intensity cross-correlations", ("sans-serif", 22))
            .margin(14)
            .x_label_area_size(44)
            .y_label_area_size(70)
            .build_cartesian_2d(x0..x1, (y0.max(1e-3) * 0.9..y1 * 1.1).log_scale())
            .map_err(|e| CliError::io(out, e))?;
        chart
            .configure_mesh()
            .x_desc("omega_r t")
            .y_desc("g2")
            .draw()
            .map_err(|e| CliError::io(out, e))?;
        for (name, pts, color) in &series {
            let color = *color;
            chart
                .draw_series(LineSeries::new(
                    pts.iter().filter(positive).copied(),
                    &color,
                ))
                .map_err(|e| CliError::io(out, e))?
                .label(*name)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE)
            .border_style(BLACK)
            .draw()
            .map_err(|e| CliError::io(out, e))?;
        root.present().map_err(|e| CliError::io(out, e))?;
    }
    Ok(svg)
}

/// Renders `figure` from the outputs listed in the manifest; returns the SVG path.
pub fn plot(manifest_path: &Path, figure: &str, out_dir: Option<&Path>) -> CliResult<PathBuf> {
    let manifest = load_manifest(manifest_path)?;
    let dir = manifest_path
        .parent()
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let target_dir = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| dir.clone());
    let out = target_dir.join(format!("{figure}.svg"));
    let svg = match figure {
        "fig1" => fig1(&manifest, &dir, &out)?,
        "fig2" => fig2(&manifest, &dir, &out)?,
        "g212" => g212(&manifest, &dir, &out)?,
        other => {
            return Err(CliError::config(
                "figure",
                format!("unknown figure {other:?}; expected one of {FIGURES:?}"),
            ))
        }
    };
    std::fs::create_dir_all(&target_dir).map_err(|e| CliError::io(&target_dir, e))?;
    std::fs::write(&out, svg).map_err(|e| CliError::io(&out, e))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_keep_undefined_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,y\n0.0,\n1.0,2.0\n").unwrap();
        let c = Columns::read(&path).unwrap();
        assert_eq!(c.column("y").unwrap(), [None, Some(2.0)]);
        assert_eq!(c.xy("x", "y").unwrap(), [(1.0, 2.0)]);
        assert_eq!(c.column("z").unwrap_err().exit_code(), 2);

        std::fs::write(&path, "x,y\n").unwrap();
        assert_eq!(Columns::read(&path).unwrap_err().exit_code(), 2);
        std::fs::write(&path, "x,y\nfoo,1\n").unwrap();
        assert_eq!(Columns::read(&path).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn flat_data_gets_a_finite_range() {
        let ((x0, x1), (y0, y1)) = bounds([(1.0, 3.0), (1.0, 3.0)]);
        assert!(x1 > x0 && y1 > y0);
    }
}
