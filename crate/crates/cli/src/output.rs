//! CSV, VTK and JSON writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use curl_lambda::domain::write_csv;
use curl_lambda::{FieldKind, FieldSample};
use serde::Serialize;

use crate::CliError;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    let f = File::create(path).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

pub fn csv(sample: &FieldSample, path: &Path) -> Result<(), CliError> {
    write_csv(sample, create(path)?)?;
    log::info!("wrote {} ({} rows)", path.display(), sample.len());
    Ok(())
}

/// `dir/name` with `_tag` inserted before the extension.
pub fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

/// Legacy ASCII STRUCTURED_POINTS covering the bounding box of the sample's
/// lattice nodes, with one scalar array per real and imaginary part of each
/// stored component. Nodes absent from the sample are written as zero.
pub fn vtk(sample: &FieldSample, path: &Path, title: &str) -> Result<(), CliError> {
    let meta = sample
        .grid
        .ok_or_else(|| CliError::Input("VTK export needs lattice data".into()))?;
    if sample.is_empty() {
        return Err(CliError::Input("VTK export of an empty sample".into()));
    }
    let keys: Vec<[i64; 3]> = sample.points.iter().map(|p| meta.index_of(*p)).collect();
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for k in &keys {
        for a in 0..3 {
            lo[a] = lo[a].min(k[a]);
            hi[a] = hi[a].max(k[a]);
        }
    }
    let dims = [0, 1, 2].map(|a| (hi[a] - lo[a] + 1) as usize);
    let total = dims[0] * dims[1] * dims[2];
    let mut slot = vec![usize::MAX; total];
    for (i, k) in keys.iter().enumerate() {
        let (x, y, z) = ((k[0] - lo[0]) as usize, (k[1] - lo[1]) as usize, (k[2] - lo[2]) as usize);
        slot[x + dims[0] * (y + dims[1] * z)] = i;
    }
    let comps: &[usize] = match sample.kind {
        FieldKind::Scalar => &[0],
        FieldKind::Vector => &[1, 2, 3],
        FieldKind::Full => &[0, 1, 2, 3],
    };
    let origin = meta.node(lo);
    let mut w = create(path)?;
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2])?;
    writeln!(w, "ORIGIN {} {} {}", origin[0], origin[1], origin[2])?;
    writeln!(w, "SPACING {} {} {}", meta.h, meta.h, meta.h)?;
    writeln!(w, "POINT_DATA {total}")?;
    for &c in comps {
        for (part, name) in [(0, "re"), (1, "im")] {
            writeln!(w, "SCALARS {name}_w{c} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for &s in &slot {
                let v = if s == usize::MAX {
                    0.0
                } else {
                    let z = sample.values[s].components()[c];
                    if part == 0 {
                        z.re
                    } else {
                        z.im
                    }
                };
                writeln!(w, "{v}")?;
            }
        }
    }
    w.flush()?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Input(format!("json: {e}")))?;
    writeln!(w)?;
    w.flush()?;
    log::info!("wrote {}", path.display());
    Ok(())
}
