//! Minimal PNG rendering: heatmaps and line plots, no text.

use std::path::Path;

use pinnbench_core::fdm::FieldGrid;

use crate::io::write_file;
use crate::CliError;

pub struct Canvas {
    w: usize,
    h: usize,
    px: Vec<u8>,
}

impl Canvas {
    pub fn new(w: usize, h: usize) -> Self {
        Canvas { w, h, px: vec![255; w * h * 3] }
    }

    fn put(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.w && (y as usize) < self.h {
            let o = (y as usize * self.w + x as usize) * 3;
            self.px[o..o + 3].copy_from_slice(&c);
        }
    }

    fn line(&mut self, (x0, y0): (f64, f64), (x1, y1): (f64, f64), c: [u8; 3]) {
        let n = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as usize;
        for i in 0..=n {
            let s = i as f64 / n as f64;
            let x = (x0 + s * (x1 - x0)).round() as i64;
            let y = (y0 + s * (y1 - y0)).round() as i64;
            self.put(x, y, c);
            self.put(x, y + 1, c);
        }
    }

    fn frame(&mut self, x0: usize, y0: usize, w: usize, h: usize) {
        let k = [0, 0, 0];
        let (a, b) = (x0 as f64 - 1.0, y0 as f64 - 1.0);
        let (c, d) = ((x0 + w) as f64, (y0 + h) as f64);
        self.line((a, b), (c, b), k);
        self.line((a, d), (c, d), k);
        self.line((a, b), (a, d), k);
        self.line((c, b), (c, d), k);
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.w as u32, self.h as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut wr = enc.write_header().expect("png header");
            wr.write_image_data(&self.px).expect("png data");
        }
        out
    }
}

/// Blue-white-red map on `s` in [0, 1].
fn colour(s: f64) -> [u8; 3] {
    let s = if s.is_finite() { s.clamp(0.0, 1.0) } else { 0.5 };
    if s < 0.5 {
        let a = s * 2.0;
        [(255.0 * a) as u8, (255.0 * a) as u8, 255]
    } else {
        let a = (1.0 - s) * 2.0;
        [255, (255.0 * a) as u8, (255.0 * a) as u8]
    }
}

const PALETTE: [[u8; 3]; 6] =
    [[31, 119, 180], [214, 39, 40], [44, 160, 44], [148, 103, 189], [255, 127, 14], [0, 0, 0]];

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(lo < hi) {
        let m = if lo.is_finite() { lo } else { 0.0 };
        return (m - 1.0, m + 1.0);
    }
    (lo, hi)
}

/// Draw a `cols × rows` array (row 0 at the bottom) into a panel.
fn heat_panel(c: &mut Canvas, x0: usize, y0: usize, w: usize, h: usize, vals: &[f64], cols: usize, lo: f64, hi: f64) {
    let rows = vals.len() / cols.max(1);
    if rows == 0 {
        return;
    }
    for py in 0..h {
        let r = (rows - 1) - (py * rows / h).min(rows - 1);
        for px in 0..w {
            let k = (px * cols / w).min(cols - 1);
            c.put((x0 + px) as i64, (y0 + py) as i64, colour((vals[r * cols + k] - lo) / (hi - lo)));
        }
    }
    c.frame(x0, y0, w, h);
}

/// One panel per field: space-time for 1-D grids, last time slice for 2-D.
pub fn heatmap(g: &FieldGrid) -> Canvas {
    let (pw, ph, m) = (320, 240, 20);
    let nf = g.n_fields().max(1);
    let mut c = Canvas::new(nf * (pw + m) + m, ph + 2 * m);
    for f in 0..g.n_fields() {
        let (vals, cols) = match g.space.len() {
            0 => (g.fields[f].clone(), 1),
            1 => (g.fields[f].clone(), g.space[0].count),
            _ => (g.slice(f, g.times.len() - 1).to_vec(), g.space[0].count),
        };
        let (lo, hi) = range(vals.iter().copied());
        heat_panel(&mut c, m + f * (pw + m), m, pw, ph, &vals, cols, lo, hi);
    }
    c
}

/// Each series is drawn as a polyline over a shared box.
pub fn line_plot(series: &[(Vec<f64>, Vec<f64>, usize)], w: usize, h: usize) -> Canvas {
    let m = 20;
    let mut c = Canvas::new(w, h);
    let (x_lo, x_hi) = range(series.iter().flat_map(|s| s.0.iter().copied()));
    let (y_lo, y_hi) = range(series.iter().flat_map(|s| s.1.iter().copied()));
    let (iw, ih) = ((w - 2 * m) as f64, (h - 2 * m) as f64);
    let map = |x: f64, y: f64| {
        (m as f64 + (x - x_lo) / (x_hi - x_lo) * iw, m as f64 + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ih)
    };
    for (xs, ys, colour) in series {
        let pts: Vec<_> =
            xs.iter().zip(ys).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(&x, &y)| map(x, y)).collect();
        for p in pts.windows(2) {
            c.line(p[0], p[1], PALETTE[*colour % PALETTE.len()]);
        }
    }
    c.frame(m, m, w - 2 * m, h - 2 * m);
    c
}

/// Three time slices chosen across the stored times.
pub fn slice_indices(n: usize) -> Vec<usize> {
    match n {
        0 => vec![],
        1 => vec![0],
        2 => vec![0, 1],
        _ => vec![0, (n - 1) / 2, n - 1],
    }
}

/// PINN (solid colours) against a reference (black) at three time slices.
///
/// 1-D problems get one line panel per slice and field; 2-D problems get
/// heatmap pairs of the final slice; time-only problems one curve pair.
pub fn comparison(pred: &FieldGrid, reference: &FieldGrid) -> Canvas {
    match pred.space.len() {
        0 => {
            let ts = pred.times.clone();
            line_plot(&[(ts.clone(), pred.fields[0].clone(), 0), (ts, reference.fields[0].clone(), 5)], 480, 320)
        }
        1 => {
            let (pw, ph) = (320, 240);
            let slices = slice_indices(pred.times.len());
            let nf = pred.n_fields();
            let mut c = Canvas::new(slices.len() * pw, nf * ph);
            let xs: Vec<f64> = (0..pred.space[0].count).map(|i| pred.space[0].coord(i)).collect();
            for (si, &ti) in slices.iter().enumerate() {
                for f in 0..nf {
                    let rt = reference.nearest_time(pred.times[ti]);
                    let panel = line_plot(
                        &[
                            (xs.clone(), reference.slice(f, rt).to_vec(), 5),
                            (xs.clone(), pred.slice(f, ti).to_vec(), f),
                        ],
                        pw,
                        ph,
                    );
                    blit(&mut c, &panel, si * pw, f * ph);
                }
            }
            c
        }
        _ => {
            let (pw, ph, m) = (240, 240, 20);
            let nf = pred.n_fields();
            let mut c = Canvas::new(2 * (pw + m) + m, nf * (ph + m) + m);
            let cols = pred.space[0].count;
            for f in 0..nf {
                let a = pred.slice(f, pred.times.len() - 1);
                let b = reference.slice(f, reference.nearest_time(*pred.times.last().unwrap()));
                let (lo, hi) = range(a.iter().chain(b).copied());
                heat_panel(&mut c, m, m + f * (ph + m), pw, ph, a, cols, lo, hi);
                heat_panel(&mut c, 2 * m + pw, m + f * (ph + m), pw, ph, b, cols, lo, hi);
            }
            c
        }
    }
}

fn blit(dst: &mut Canvas, src: &Canvas, x0: usize, y0: usize) {
    for y in 0..src.h {
        for x in 0..src.w {
            let o = (y * src.w + x) * 3;
            dst.put((x0 + x) as i64, (y0 + y) as i64, [src.px[o], src.px[o + 1], src.px[o + 2]]);
        }
    }
}

/// Loss history on a log scale, one colour per term.
pub fn loss_plot(iters: &[f64], terms: &[Vec<f64>]) -> Canvas {
    let series: Vec<_> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (iters.to_vec(), t.iter().map(|v| if *v > 0.0 { v.log10() } else { f64::NAN }).collect(), i))
        .collect();
    line_plot(&series, 480, 320)
}

pub fn save(c: &Canvas, path: &Path) -> Result<(), CliError> {
    write_file(path, &c.encode())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pinnbench_core::fdm::Axis;

    #[test]
    fn encodes_png() {
        let g = FieldGrid {
            space: vec![Axis::new(0.0, 0.1, 11)],
            times: vec![0.0, 0.5, 1.0],
            fields: vec![(0..33).map(|i| (i as f64).sin()).collect()],
            diverged_at: None,
        };
        let bytes = heatmap(&g).encode();
        assert_eq!(&bytes[1..4], b"PNG");
        let bytes = comparison(&g, &g).encode();
        assert_eq!(&bytes[1..4], b"PNG");
    }

    #[test]
    fn flat_data_does_not_panic() {
        let c = line_plot(&[(vec![0.0, 1.0], vec![2.0, 2.0], 0), (vec![], vec![], 1)], 100, 80);
        assert_eq!(c.px.len(), 100 * 80 * 3);
        assert_eq!(slice_indices(5), vec![0, 2, 4]);
    }
}
