//! Binary cube files, CSV stack import, result export and plot data.
//!
//! Cube file layout (all integers little-endian):
//!
//! | bytes      | content                                  |
//! |------------|------------------------------------------|
//! | 0..4       | magic `MDMV`                             |
//! | 4..8       | version, `u32` = 1                       |
//! | 8          | number of axes, `u8`                     |
//! | 9..9+8n    | extents, `u64` each, time last           |
//! | rest       | samples, `f64` each, row-major           |

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::cube::SignalCube;
use crate::error::{Error, Result};
use crate::orchestrator::{DecompositionResult, ImfRecord, StFifResult};

pub const MAGIC: &[u8; 4] = b"MDMV";
pub const VERSION: u32 = 1;
pub const CUBE_EXTENSION: &str = "mdmv";
pub const MANIFEST_NAME: &str = "manifest.txt";

/// Size in bytes of a cube file with these extents.
pub fn cube_file_len(dims: &[usize]) -> u64 {
    9 + 8 * dims.len() as u64 + 8 * dims.iter().product::<usize>() as u64
}

pub fn encode_cube(cube: &SignalCube) -> Vec<u8> {
    let mut out = Vec::with_capacity(cube_file_len(cube.dims()) as usize);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(cube.ndim() as u8);
    for &d in cube.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in cube.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

pub fn decode_cube(bytes: &[u8]) -> Result<SignalCube> {
    if bytes.len() < 9 {
        return Err(format_err(bytes.len(), format!("header needs 9 bytes, file has {}", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(format_err(0, "bad magic, expected \"MDMV\""));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let ndim = bytes[8] as usize;
    if ndim < 2 {
        return Err(format_err(8, format!("need at least 2 axes, header says {ndim}")));
    }
    let header = 9 + 8 * ndim;
    if bytes.len() < header {
        return Err(format_err(
            bytes.len(),
            format!("extents need {header} header bytes, file has {}", bytes.len()),
        ));
    }
    let dims: Vec<usize> = bytes[9..header]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")) as usize)
        .collect();
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| format_err(9, format!("extents {dims:?} overflow")))?;
    let expected = count
        .checked_mul(8)
        .and_then(|b| b.checked_add(header))
        .ok_or_else(|| format_err(9, format!("extents {dims:?} overflow")))?;
    if bytes.len() != expected {
        let offset = bytes.len().min(expected);
        return Err(format_err(
            offset,
            format!("expected {expected} bytes for extents {dims:?}, file has {}", bytes.len()),
        ));
    }
    let values = bytes[header..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    match SignalCube::new(&dims, values) {
        Err(Error::NonFinite { index }) => Err(format_err(header + 8 * index, "non-finite sample")),
        Err(Error::InvalidDims(d)) => Err(format_err(9, format!("invalid extents {d:?}"))),
        other => other,
    }
}

pub fn write_cube(cube: &SignalCube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&encode_cube(cube))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<SignalCube> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_cube(&bytes)
}

fn read_grid(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Parse {
                file: path.to_path_buf(),
                row: 0,
                col: 0,
                message: format!("{other:?}"),
            },
        })?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            file: path.to_path_buf(),
            row,
            col: 0,
            message: e.to_string(),
        })?;
        let width = *cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::Parse {
                file: path.to_path_buf(),
                row,
                col: record.len().min(width),
                message: format!("row has {} cells, expected {width}", record.len()),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let parse = |message: String| Error::Parse {
                file: path.to_path_buf(),
                row,
                col,
                message,
            };
            let v: f64 = cell.parse().map_err(|e| parse(format!("{cell:?}: {e}")))?;
            if !v.is_finite() {
                return Err(parse(format!("non-finite value {cell:?}")));
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(Error::Parse {
            file: path.to_path_buf(),
            row: 0,
            col: 0,
            message: "empty grid".into(),
        });
    }
    Ok((rows, cols, values))
}

/// Stacks the CSV grids listed in `manifest_path` (one path per line, time
/// order, relative paths resolved against the manifest's directory, blank
/// lines and `#` comments ignored) into a `rows × cols × steps` cube.
pub fn import_csv_stack(manifest_path: impl AsRef<Path>) -> Result<SignalCube> {
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let files: Vec<PathBuf> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| base.join(l))
        .collect();
    if files.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{} lists no files",
            manifest_path.display()
        )));
    }
    let steps = files.len();
    let mut shape = None;
    let mut data = Vec::new();
    for (t, file) in files.iter().enumerate() {
        let (rows, cols, values) = read_grid(file)?;
        let (r0, c0) = *shape.get_or_insert((rows, cols));
        if (rows, cols) != (r0, c0) {
            return Err(Error::ShapeMismatch(t));
        }
        if data.is_empty() {
            data = vec![0.0; rows * cols * steps];
        }
        for (k, v) in values.into_iter().enumerate() {
            data[k * steps + t] = v;
        }
    }
    let (rows, cols) = shape.expect("at least one file");
    SignalCube::new(&[rows, cols, steps], data)
}

/// One line of an export manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub group: String,
    pub file: String,
    pub info: String,
}

fn record_info(r: &ImfRecord) -> String {
    format!(
        "{} iterations={} clamped={} round={}",
        r.scale, r.iterations, r.clamped_bins, r.round
    )
}

fn write_entries(dir: &Path, dims: &[usize], entries: &[ManifestEntry]) -> Result<PathBuf> {
    let mut text = String::from("# mdmvfif decomposition\n");
    let dims: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
    writeln!(text, "dims {}", dims.join(" ")).expect("string write");
    for e in entries {
        if e.info.is_empty() {
            writeln!(text, "{} {}", e.group, e.file).expect("string write");
        } else {
            writeln!(text, "{} {} {}", e.group, e.file, e.info).expect("string write");
        }
    }
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `imf_s_NN`, `imf_t_NN` and `residual` cube files plus a manifest.
/// The residual is listed at the end of the spatial group as well as on its
/// own line. Returns the manifest path.
pub fn export_result(result: &DecompositionResult, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    ensure_dir(dir)?;
    let mut entries = Vec::new();
    let groups = [
        ("spatial", "imf_s", &result.spatial_imfs, crate::orchestrator::Stage::Spatial),
        ("temporal", "imf_t", &result.temporal_imfs, crate::orchestrator::Stage::Temporal),
    ];
    let residual_name = format!("residual.{CUBE_EXTENSION}");
    for (group, prefix, imfs, stage) in groups {
        let records: Vec<&ImfRecord> = result.records(stage).collect();
        for (k, imf) in imfs.iter().enumerate() {
            let name = format!("{prefix}_{:02}.{CUBE_EXTENSION}", k + 1);
            write_cube(imf, dir.join(&name))?;
            entries.push(ManifestEntry {
                group: group.into(),
                file: name,
                info: records.get(k).map(|r| record_info(r)).unwrap_or_default(),
            });
        }
        if group == "spatial" {
            entries.push(ManifestEntry {
                group: group.into(),
                file: residual_name.clone(),
                info: "residual".into(),
            });
        }
    }
    write_cube(&result.residual, dir.join(&residual_name))?;
    entries.push(ManifestEntry {
        group: "residual".into(),
        file: residual_name,
        info: String::new(),
    });
    for w in &result.warnings {
        log::info!("exported with warning: {w}");
    }
    write_entries(dir, result.residual.dims(), &entries)
}

/// Writes `imf_NN` files and `residual` for a separable decomposition.
pub fn export_stfif(result: &StFifResult, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    ensure_dir(dir)?;
    let mut entries = Vec::new();
    for (k, imf) in result.imfs.iter().enumerate() {
        let name = format!("imf_{:02}.{CUBE_EXTENSION}", k + 1);
        write_cube(imf, dir.join(&name))?;
        entries.push(ManifestEntry {
            group: "spacetime".into(),
            file: name,
            info: result.diagnostics.get(k).map(record_info).unwrap_or_default(),
        });
    }
    let residual_name = format!("residual.{CUBE_EXTENSION}");
    write_cube(&result.residual, dir.join(&residual_name))?;
    entries.push(ManifestEntry {
        group: "residual".into(),
        file: residual_name,
        info: String::new(),
    });
    write_entries(dir, result.residual.dims(), &entries)
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = dir.as_ref().join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut entries = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("dims ") {
            continue;
        }
        let mut parts = line.splitn(3, ' ');
        let group = parts.next().unwrap_or_default().to_string();
        let file = parts
            .next()
            .ok_or_else(|| Error::InvalidConfig(format!("{}: malformed line {line:?}", path.display())))?
            .to_string();
        let info = parts.next().unwrap_or_default().to_string();
        entries.push(ManifestEntry { group, file, info });
    }
    Ok(entries)
}

/// Every distinct cube listed in an export manifest, in listing order.
pub fn import_exported(dir: impl AsRef<Path>) -> Result<Vec<(String, SignalCube)>> {
    let dir = dir.as_ref();
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for entry in read_manifest(dir)? {
        if seen.contains(&entry.file) {
            continue;
        }
        let cube = read_cube(dir.join(&entry.file))?;
        seen.push(entry.file.clone());
        out.push((entry.file, cube));
    }
    Ok(out)
}

/// What part of a cube to turn into plot data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlotSelector {
    /// The spatial field at one time step. Leading spatial axes become rows,
    /// the last spatial axis becomes columns.
    Slice(usize),
    /// The time series at one spatial location, as `t,value` rows.
    Series(Vec<usize>),
}

pub fn export_plotdata(cube: &SignalCube, selector: &PlotSelector) -> Result<String> {
    let mut out = String::new();
    match selector {
        PlotSelector::Slice(t) => {
            if *t >= cube.time_len() {
                let mut index = vec![0; cube.spatial_ndim()];
                index.push(*t);
                return Err(Error::IndexOutOfRange {
                    index,
                    dims: cube.dims().to_vec(),
                });
            }
            let slice = cube.time_slice(*t);
            let cols = *cube.spatial_dims().last().expect("at least one spatial axis");
            let row_values: Vec<String> = slice.iter().map(|v| v.to_string()).collect();
            for row in row_values.chunks(cols) {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        PlotSelector::Series(loc) => {
            let series = cube.series(loc)?;
            for (t, v) in series.iter().enumerate() {
                writeln!(out, "{t},{v}").expect("string write");
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cube(dims: &[usize], seed: u64) -> SignalCube {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SignalCube::from_fn(dims, |_| rng.random_range(-1e3..1e3)).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let c = random_cube(&[5, 7, 3], 1);
        let p = dir.path().join("c.mdmv");
        write_cube(&c, &p).unwrap();
        let back = read_cube(&p).unwrap();
        assert_eq!(back.dims(), c.dims());
        for (a, b) in back.values().iter().zip(c.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(fs::metadata(&p).unwrap().len(), cube_file_len(&[5, 7, 3]));
    }

    #[test]
    fn header_layout() {
        let c = SignalCube::new(&[1, 2], vec![1.5, -2.0]).unwrap();
        let b = encode_cube(&c);
        assert_eq!(&b[..4], b"MDMV");
        assert_eq!(&b[4..8], &[1, 0, 0, 0]);
        assert_eq!(b[8], 2);
        assert_eq!(&b[9..17], &1u64.to_le_bytes());
        assert_eq!(&b[17..25], &2u64.to_le_bytes());
        assert_eq!(&b[25..33], &1.5f64.to_le_bytes());
        assert_eq!(b.len(), 41);
    }

    #[test]
    fn corrupt_files_report_offsets() {
        let c = random_cube(&[3, 4, 2], 2);
        let mut b = encode_cube(&c);
        let full = b.len();
        b.truncate(full - 5);
        match decode_cube(&b) {
            Err(Error::Format { offset, message }) => {
                assert_eq!(offset as usize, full - 5);
                assert!(message.contains(&full.to_string()), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let mut bad = encode_cube(&c);
        bad[0] = b'X';
        assert!(matches!(decode_cube(&bad), Err(Error::Format { offset: 0, .. })));
        let mut bad = encode_cube(&c);
        bad[4] = 2;
        assert!(matches!(decode_cube(&bad), Err(Error::Format { offset: 4, .. })));
        assert!(matches!(decode_cube(b"MDM"), Err(Error::Format { offset: 3, .. })));
    }

    fn write_grid(path: &Path, rows: &[&[f64]]) {
        let text: String = rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",") + "\n")
            .collect();
        fs::write(path, text).unwrap();
    }

    #[test]
    fn csv_stack_in_manifest_order() {
        let dir = tempfile::tempdir().unwrap();
        write_grid(&dir.path().join("a.csv"), &[&[1.0, 2.0], &[3.0, 4.0]]);
        write_grid(&dir.path().join("b.csv"), &[&[5.0, 6.0], &[7.0, 8.0]]);
        let m = dir.path().join("list.txt");
        fs::write(&m, "b.csv\n\na.csv\n").unwrap();
        let c = import_csv_stack(&m).unwrap();
        assert_eq!(c.dims(), &[2, 2, 2]);
        assert_eq!(c.series(&[0, 1]).unwrap().to_vec(), vec![6.0, 2.0]);
        assert_eq!(c.get(&[1, 0, 1]), Some(3.0));
    }

    #[test]
    fn csv_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_grid(&dir.path().join("a.csv"), &[&[1.0, 2.0], &[3.0, 4.0]]);
        write_grid(&dir.path().join("b.csv"), &[&[5.0, 6.0, 0.0], &[7.0, 8.0, 0.0]]);
        fs::write(dir.path().join("c.csv"), "1,2\n3,abc\n").unwrap();
        fs::write(dir.path().join("d.csv"), "1,2\nNaN,4\n").unwrap();
        let m = dir.path().join("m.txt");
        fs::write(&m, "a.csv\nb.csv\n").unwrap();
        assert!(matches!(import_csv_stack(&m), Err(Error::ShapeMismatch(1))));
        fs::write(&m, "a.csv\nc.csv\n").unwrap();
        assert!(matches!(import_csv_stack(&m), Err(Error::Parse { row: 1, col: 1, .. })));
        fs::write(&m, "d.csv\n").unwrap();
        assert!(matches!(import_csv_stack(&m), Err(Error::Parse { row: 1, col: 0, .. })));
        fs::write(&m, "missing.csv\n").unwrap();
        assert!(matches!(import_csv_stack(&m), Err(Error::Io { .. })));
    }

    #[test]
    fn plot_data() {
        let c = SignalCube::new(&[1, 1, 4], vec![0.5, 1.0, 1.5, 2.0]).unwrap();
        let s = export_plotdata(&c, &PlotSelector::Series(vec![0, 0])).unwrap();
        assert_eq!(s, "0,0.5\n1,1\n2,1.5\n3,2\n");
        let flat = SignalCube::from_fn(&[3, 2, 2], |_| 7.0).unwrap();
        let g = export_plotdata(&flat, &PlotSelector::Slice(1)).unwrap();
        assert_eq!(g, "7,7\n7,7\n7,7\n");
        assert!(matches!(
            export_plotdata(&flat, &PlotSelector::Slice(2)),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            export_plotdata(&flat, &PlotSelector::Series(vec![3, 0])),
            Err(Error::IndexOutOfRange { .. })
        ));
    }
}
