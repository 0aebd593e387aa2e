//! FieldGrid files: CSV for people, "FGRD" binary for exact round trips.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use pinnbench_core::fdm::{Axis, FieldGrid};

use crate::CliError;

const MAGIC: &[u8; 4] = b"FGRD";
const VERSION: u32 = 1;

const AXIS_NAMES: [&str; 2] = ["x", "y"];
const FIELD_NAMES: [&str; 2] = ["u", "v"];

/// Rows ordered by time, then node (x fastest).
pub fn grid_to_csv(g: &FieldGrid) -> String {
    let mut s = String::from("t");
    for name in AXIS_NAMES.iter().take(g.space.len()) {
        s.push(',');
        s.push_str(name);
    }
    for name in FIELD_NAMES.iter().take(g.n_fields()) {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    let n = g.slice_len();
    for ti in 0..g.times.len() {
        for k in 0..n {
            let p = g.node_point(ti, k);
            s.push_str(&format!("{}", g.times[ti]));
            for c in &p[..g.space.len()] {
                s.push_str(&format!(",{c}"));
            }
            for f in 0..g.n_fields() {
                s.push_str(&format!(",{}", g.fields[f][ti * n + k]));
            }
            s.push('\n');
        }
    }
    s
}

pub fn grid_to_bytes(g: &FieldGrid) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&VERSION.to_le_bytes());
    b.extend_from_slice(&(g.space.len() as u32).to_le_bytes());
    for a in &g.space {
        b.extend_from_slice(&a.origin.to_le_bytes());
        b.extend_from_slice(&a.step.to_le_bytes());
        b.extend_from_slice(&(a.count as u64).to_le_bytes());
    }
    b.extend_from_slice(&(g.times.len() as u64).to_le_bytes());
    for t in &g.times {
        b.extend_from_slice(&t.to_le_bytes());
    }
    b.extend_from_slice(&(g.n_fields() as u32).to_le_bytes());
    for f in &g.fields {
        b.extend_from_slice(&(f.len() as u64).to_le_bytes());
        for v in f {
            b.extend_from_slice(&v.to_le_bytes());
        }
    }
    b.extend_from_slice(&g.diverged_at.map_or(u64::MAX, |d| d as u64).to_le_bytes());
    b
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.b.len()).ok_or("truncated file")?;
        let s = &self.b[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self) -> Result<usize, String> {
        let n = self.u64()? as usize;
        // Every counted item takes at least 8 bytes.
        if n > self.b.len() / 8 + 1 {
            return Err("implausible length".into());
        }
        Ok(n)
    }
}

pub fn grid_from_bytes(b: &[u8]) -> Result<FieldGrid, String> {
    let mut r = Reader { b, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err("not a FieldGrid file (bad magic)".into());
    }
    let v = r.u32()?;
    if v != VERSION {
        return Err(format!("unsupported FieldGrid version {v}"));
    }
    let dims = r.u32()? as usize;
    if dims > 2 {
        return Err(format!("{dims} spatial axes"));
    }
    let mut space = Vec::new();
    for _ in 0..dims {
        let origin = r.f64()?;
        let step = r.f64()?;
        let count = r.u64()? as usize;
        space.push(Axis::new(origin, step, count));
    }
    let nt = r.len()?;
    let times = (0..nt).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let nf = r.u32()? as usize;
    if nf > 2 {
        return Err(format!("{nf} fields"));
    }
    let mut fields = Vec::new();
    for _ in 0..nf {
        let n = r.len()?;
        fields.push((0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?);
    }
    let d = r.u64()?;
    let g = FieldGrid { space, times, fields, diverged_at: (d != u64::MAX).then_some(d as usize) };
    let want = g.slice_len().checked_mul(g.times.len()).ok_or("size overflow")?;
    if g.fields.iter().any(|f| f.len() != want) {
        return Err("field length does not match axes".into());
    }
    Ok(g)
}

pub fn read_grid(path: &Path) -> Result<FieldGrid, CliError> {
    let b = fs::read(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    grid_from_bytes(&b).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Refuse to overwrite unless `force`.
pub fn check_fresh(paths: &[&Path], force: bool) -> Result<(), CliError> {
    if force {
        return Ok(());
    }
    for p in paths {
        if p.exists() {
            return Err(CliError::refusal(format!("{} exists (use --force to overwrite)", p.display())));
        }
    }
    Ok(())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FieldGrid {
        FieldGrid {
            space: vec![Axis::new(0.0, 0.5, 3), Axis::new(-1.0, 1.0, 2)],
            times: vec![0.0, 0.25],
            fields: vec![(0..12).map(|i| i as f64 * 0.1).collect(), (0..12).map(|i| 1.0 - i as f64).collect()],
            diverged_at: Some(7),
        }
    }

    #[test]
    fn binary_round_trip() {
        let g = sample();
        assert_eq!(grid_from_bytes(&grid_to_bytes(&g)).unwrap(), g);
        let mut h = g.clone();
        h.diverged_at = None;
        assert_eq!(grid_from_bytes(&grid_to_bytes(&h)).unwrap(), h);
    }

    #[test]
    fn rejects_damage() {
        let b = grid_to_bytes(&sample());
        assert!(grid_from_bytes(&b[..b.len() - 3]).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(grid_from_bytes(&bad).is_err());
    }

    #[test]
    fn csv_layout() {
        let csv = grid_to_csv(&sample());
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t,x,y,u,v");
        assert_eq!(lines.len(), 1 + 12);
        assert_eq!(lines[1], "0,0,-1,0,1");
        assert_eq!(lines[2], "0,0.5,-1,0.1,0");
        assert!(lines[7].starts_with("0.25,0,-1,"));
    }
}
