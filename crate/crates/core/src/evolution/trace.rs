use std::io::Write;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySample {
    pub t: f64,
    pub l2: f64,
    pub hs: f64,
    /// `(Σu, u)` in L².
    pub sigma_energy: f64,
    pub k0: f64,
    pub k1: f64,
}

/// Time series of norms and symmetrized energy along one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnergyTrace {
    pub samples: Vec<EnergySample>,
}

impl EnergyTrace {
    pub fn push(&mut self, s: EnergySample) {
        self.samples.push(s);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&EnergySample> {
        self.samples.last()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,l2,hs,sigma_energy,k0,k1")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                s.t, s.l2, s.hs, s.sigma_energy, s.k0, s.k1
            )?;
        }
        Ok(())
    }
}
