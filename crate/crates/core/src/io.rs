//! Text and raster serialisation of analysis outputs.

use serde::{Deserialize, Serialize};

use crate::cantor::CantorApprox;
use crate::metrics::PointCloud;
use crate::surfaces::GridFunction;

/// Stamp carried by every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub config_hash: String,
    pub version: String,
}

impl Provenance {
    pub fn new(command: &str, config_hash: &str) -> Self {
        Provenance {
            command: command.into(),
            config_hash: config_hash.into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    fn header(&self) -> String {
        format!(
            "# command: {}\n# config_hash: {}\n# version: {}\n",
            self.command, self.config_hash, self.version
        )
    }
}

pub fn cantor_csv(s: &CantorApprox, prov: &Provenance) -> String {
    let mut out = prov.header();
    out.push_str(&format!("# depth: {}\n# provenance: {}\nlo,hi\n", s.depth, s.provenance));
    for (lo, hi) in &s.intervals {
        out.push_str(&format!("{lo:.17e},{hi:.17e}\n"));
    }
    out
}

pub fn cloud_csv(c: &PointCloud, prov: &Provenance) -> String {
    let mut out = prov.header();
    out.push_str(&format!(
        "# section: axis {} = {}\n# grid: {}\n# horizons: forward {} backward {} transient {}\nx_u,x_c,x_s\n",
        c.section.axis, c.section.value, c.grid, c.n_fwd, c.n_back, c.transient
    ));
    for p in &c.points {
        out.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", p[0], p[1], p[2]));
    }
    out
}

pub fn grid_csv(g: &GridFunction, prov: &Provenance) -> String {
    let mut out = prov.header();
    let names = match g.kind {
        crate::surfaces::SurfaceKind::Cu => "x_u,x_c,phi",
        crate::surfaces::SurfaceKind::Cs => "x_c,x_s,phi_star",
    };
    out.push_str(&format!("# surface: {:?}\n# resolution: {}\n{names}\n", g.kind, g.n));
    for (r, _) in g.rects.iter().enumerate() {
        for i in 0..g.n {
            for j in 0..g.n {
                let x = g.node(r, i, j);
                out.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", x[0], x[1], g.values[r][i * g.n + j]));
            }
        }
    }
    out
}

/// Binary PGM, one byte per grid cell, 0 for members and 255 otherwise.
/// Row index follows the second free axis, top row at its maximum.
pub fn cloud_pgm(c: &PointCloud, prov: &Provenance) -> Vec<u8> {
    let n = c.grid;
    let mut pix = vec![255u8; n * n];
    for &(i, j) in &c.cells {
        let row = n - 1 - j;
        pix[row * n + i] = 0;
    }
    let mut out = format!(
        "P5\n# command: {} config_hash: {} version: {}\n{} {}\n255\n",
        prov.command, prov.config_hash, prov.version, n, n
    )
    .into_bytes();
    out.extend_from_slice(&pix);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::SectionSpec;

    #[test]
    fn pgm_layout() {
        let cloud = PointCloud {
            points: vec![[1.0, 0.0, 0.0]],
            section: SectionSpec::new(0, 1.0),
            grid: 2,
            n_fwd: 1,
            n_back: 1,
            transient: 0,
            cells: vec![(0, 0)],
        };
        let bytes = cloud_pgm(&cloud, &Provenance::new("render", "abc"));
        let text_end = bytes.len() - 4;
        let head = String::from_utf8_lossy(&bytes[..text_end]);
        assert!(head.starts_with("P5\n# command: render config_hash: abc"));
        assert!(head.ends_with("2 2\n255\n"));
        assert_eq!(&bytes[text_end..], &[255, 255, 0, 255]);
    }
}
