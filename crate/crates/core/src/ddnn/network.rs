use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use super::layer::{DiffractiveLayer, Modulation};
use crate::error::{ensure_same_grid, Error, Result};
use crate::field::ComplexField;
use crate::grid::GridSpec;
use crate::image::Image;
use crate::propagation::PropagationKernel;

static NEXT_VERSION: AtomicU64 = AtomicU64::new(1);

fn next_version() -> u64 {
    NEXT_VERSION.fetch_add(1, Ordering::Relaxed)
}

/// How the output-plane intensity is mapped onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputScaling {
    /// Linear rescale so the darkest pixel reads 0 and the brightest 1.
    MinMax,
    /// `I * n^2 * dx^2`: intensity relative to a uniform field of the same power.
    /// Not clipped; a passive network keeps the mean at or below one.
    PowerReferenced,
}

impl OutputScaling {
    pub fn code(self) -> u8 {
        match self {
            Self::MinMax => 0,
            Self::PowerReferenced => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::MinMax),
            1 => Some(Self::PowerReferenced),
            _ => None,
        }
    }
}

/// Stack of diffractive layers with equal spacing between consecutive planes.
#[derive(Debug, Clone)]
pub struct DiffractiveNetwork {
    grid: GridSpec,
    spacing: f64,
    mode: Modulation,
    scaling: OutputScaling,
    layers: Vec<DiffractiveLayer>,
    kernel: PropagationKernel,
    version: u64,
}

impl DiffractiveNetwork {
    /// Network of `layer_count` transparent layers.
    pub fn new(grid: GridSpec, layer_count: usize, spacing: f64, mode: Modulation) -> Result<Self> {
        let layers = (0..layer_count)
            .map(|_| DiffractiveLayer::transparent(mode, grid.len()))
            .collect();
        Self::from_layers(grid, spacing, mode, layers)
    }

    pub fn from_layers(
        grid: GridSpec,
        spacing: f64,
        mode: Modulation,
        layers: Vec<DiffractiveLayer>,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("a network needs at least one layer".into()));
        }
        if let Some(bad) = layers.iter().find(|l| l.len() != grid.len()) {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: bad.len(),
            });
        }
        if layers.iter().any(|l| l.mode() != mode) {
            return Err(Error::Config(
                "all layers must share the network's modulation".into(),
            ));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Config(alloc::format!(
                "layer spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self {
            grid,
            spacing,
            mode,
            scaling: OutputScaling::MinMax,
            layers,
            kernel: PropagationKernel::new(grid, spacing)?,
            version: next_version(),
        })
    }

    pub fn with_scaling(mut self, scaling: OutputScaling) -> Self {
        self.scaling = scaling;
        self.version = next_version();
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn mode(&self) -> Modulation {
        self.mode
    }

    pub fn scaling(&self) -> OutputScaling {
        self.scaling
    }

    pub fn layers(&self) -> &[DiffractiveLayer] {
        &self.layers
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Total distance from the input plane to the output plane.
    pub fn depth(&self) -> f64 {
        self.spacing * (self.layers.len() + 1) as f64
    }

    /// Mutable access to one layer; invalidates outstanding tapes.
    pub fn layer_mut(&mut self, index: usize) -> &mut DiffractiveLayer {
        self.version = next_version();
        &mut self.layers[index]
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DiffractiveLayer] {
        self.version = next_version();
        &mut self.layers
    }

    /// Changes the gap between planes and rebuilds the propagation kernel.
    pub fn set_spacing(&mut self, spacing: f64) -> Result<()> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Config(alloc::format!(
                "layer spacing must be positive, got {spacing}"
            )));
        }
        self.kernel = PropagationKernel::new(self.grid, spacing)?;
        self.spacing = spacing;
        self.version = next_version();
        Ok(())
    }

    /// Fill trainable phases with uniform noise in `[-scale, scale]` from a seeded generator.
    pub fn randomize_phases(&mut self, seed: u64, scale: f64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for layer in self.layers_mut() {
            for p in layer.phase_mut() {
                *p = rng.random_range(-scale..=scale);
            }
        }
    }

    pub fn parameter_count(&self) -> usize {
        let per_layer = self.grid.len()
            * (self.mode.trains_phase() as usize + self.mode.trains_amplitude() as usize);
        per_layer * self.layers.len()
    }

    /// Propagates `input` through every layer and records the intermediate planes.
    pub fn forward(&self, input: &ComplexField) -> Result<Forward> {
        ensure_same_grid(&self.grid, input.grid())?;
        let mut incident = Vec::with_capacity(self.layers.len());
        let mut transmitted = Vec::with_capacity(self.layers.len());
        let mut field = input.clone();
        for layer in &self.layers {
            let arriving = self.kernel.propagate(&field)?;
            let values = arriving
                .values()
                .iter()
                .zip(layer.transmission())
                .map(|(u, t)| u * t)
                .collect();
            field = ComplexField::new(self.grid, values)?;
            incident.push(arriving);
            transmitted.push(field.clone());
        }
        let output_field = self.kernel.propagate(&field)?;
        let raw = output_field.intensity();
        let (output, extremes) = match self.scaling {
            OutputScaling::MinMax => {
                let (lo_idx, hi_idx) = arg_extremes(raw.as_slice());
                let lo = raw.as_slice()[lo_idx];
                let span = raw.as_slice()[hi_idx] - lo;
                if !(span > 0.0 && span.is_finite()) {
                    return Err(Error::Degenerate("network output intensity is constant"));
                }
                let data = raw.as_slice().iter().map(|v| (v - lo) / span).collect();
                (
                    Image::new(self.grid.n(), data)?,
                    Some((lo_idx, hi_idx, span)),
                )
            }
            OutputScaling::PowerReferenced => {
                let c = self.power_reference();
                let data = raw.as_slice().iter().map(|v| v * c).collect();
                (Image::new(self.grid.n(), data)?, None)
            }
        };
        Ok(Forward {
            output: output.clone(),
            tape: Tape {
                version: self.version,
                incident,
                transmitted,
                output_field,
                output,
                extremes,
            },
        })
    }

    fn power_reference(&self) -> f64 {
        let dx = self.grid.dx();
        self.grid.len() as f64 * dx * dx
    }

    /// Exact gradient of [`loss_mse`] with respect to every trainable array.
    pub fn backward(&self, tape: &Tape, target: &Image) -> Result<Gradients> {
        if tape.version != self.version || tape.transmitted.len() != self.layers.len() {
            return Err(Error::Contract(
                "tape was recorded by a different network state",
            ));
        }
        let out = tape.output.as_slice();
        if target.len() != out.len() {
            return Err(Error::Dimension {
                expected: out.len(),
                found: target.len(),
            });
        }
        let pixels = out.len() as f64;
        let d_out: Vec<f64> = out
            .iter()
            .zip(target.as_slice())
            .map(|(o, g)| 2.0 * (o - g) / pixels)
            .collect();

        // d loss / d raw intensity.
        let d_raw: Vec<f64> = match tape.extremes {
            Some((lo_idx, hi_idx, span)) => {
                let mut d: Vec<f64> = d_out.iter().map(|g| g / span).collect();
                let mut via_lo = 0.0;
                let mut via_hi = 0.0;
                for (g, o) in d_out.iter().zip(out) {
                    via_lo += g * (o - 1.0);
                    via_hi -= g * o;
                }
                d[lo_idx] += via_lo / span;
                d[hi_idx] += via_hi / span;
                d
            }
            None => {
                let c = self.power_reference();
                d_out.iter().map(|g| g * c).collect()
            }
        };

        // Real loss, complex field: dL = Re sum conj(G) du with G = 2 dL/dI * u.
        let adjoint: Vec<Complex64> = tape
            .output_field
            .values()
            .iter()
            .zip(&d_raw)
            .map(|(u, g)| u * (2.0 * g))
            .collect();
        let mut adjoint = self
            .kernel
            .propagate_adjoint(&ComplexField::new(self.grid, adjoint)?)?;

        let count = self.layers.len();
        let mut phase = vec![Vec::new(); count];
        let mut log_amplitude = vec![Vec::new(); count];
        for i in (0..count).rev() {
            let layer = &self.layers[i];
            let after = tape.transmitted[i].values();
            let mut d_phase = vec![0.0; after.len()];
            let mut d_amp = vec![0.0; after.len()];
            for ((g, b), (dp, da)) in adjoint
                .values()
                .iter()
                .zip(after)
                .zip(d_phase.iter_mut().zip(d_amp.iter_mut()))
            {
                let z = g.conj() * b;
                *dp = -z.im;
                *da = z.re;
            }
            if !layer.mode().trains_phase() {
                d_phase.iter_mut().for_each(|v| *v = 0.0);
            }
            if !layer.mode().trains_amplitude() {
                d_amp.iter_mut().for_each(|v| *v = 0.0);
            }
            phase[i] = d_phase;
            log_amplitude[i] = d_amp;

            if i > 0 {
                let back: Vec<Complex64> = adjoint
                    .values()
                    .iter()
                    .zip(layer.transmission())
                    .map(|(g, t)| g * t.conj())
                    .collect();
                adjoint = self
                    .kernel
                    .propagate_adjoint(&ComplexField::new(self.grid, back)?)?;
            }
        }
        Ok(Gradients {
            phase,
            log_amplitude,
        })
    }
}

fn arg_extremes(values: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[lo] {
            lo = i;
        }
        if v > values[hi] {
            hi = i;
        }
    }
    (lo, hi)
}

/// Output of a forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    /// Output-plane intensity mapped onto `[0, 1]`.
    pub output: Image,
    pub tape: Tape,
}

/// Intermediate planes retained by a forward pass for the adjoint sweep.
#[derive(Debug, Clone)]
pub struct Tape {
    version: u64,
    incident: Vec<ComplexField>,
    transmitted: Vec<ComplexField>,
    output_field: ComplexField,
    output: Image,
    extremes: Option<(usize, usize, f64)>,
}

impl Tape {
    /// Field arriving at each layer, before modulation.
    pub fn incident(&self) -> &[ComplexField] {
        &self.incident
    }

    /// Field leaving each layer, after modulation.
    pub fn transmitted(&self) -> &[ComplexField] {
        &self.transmitted
    }

    /// Complex field at the output plane.
    pub fn output_field(&self) -> &ComplexField {
        &self.output_field
    }
}

/// Loss gradients, one array per layer and parameter kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub phase: Vec<Vec<f64>>,
    pub log_amplitude: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &DiffractiveNetwork) -> Self {
        let len = net.grid().len();
        Self {
            phase: vec![vec![0.0; len]; net.layer_count()],
            log_amplitude: vec![vec![0.0; len]; net.layer_count()],
        }
    }

    /// `self += other` elementwise.
    pub fn accumulate(&mut self, other: &Self) {
        for (a, b) in self
            .phase
            .iter_mut()
            .chain(self.log_amplitude.iter_mut())
            .zip(other.phase.iter().chain(&other.log_amplitude))
        {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for a in self.phase.iter_mut().chain(self.log_amplitude.iter_mut()) {
            a.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.phase
            .iter()
            .chain(&self.log_amplitude)
            .all(|a| a.iter().all(|x| x.is_finite()))
    }

    pub fn max_abs(&self) -> f64 {
        self.phase
            .iter()
            .chain(&self.log_amplitude)
            .flat_map(|a| a.iter())
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }
}

/// Amplitude encoding of a normalized intensity image: `u = sqrt(img)`, zero phase,
/// rescaled to unit power.
pub fn encode_input(image: &Image, grid: GridSpec) -> Result<ComplexField> {
    if image.n() != grid.n() {
        return Err(Error::Dimension {
            expected: grid.len(),
            found: image.len(),
        });
    }
    if !image.is_unit_range() {
        return Err(Error::Domain(
            "input image must be normalized to [0, 1]".into(),
        ));
    }
    let values = image
        .as_slice()
        .iter()
        .map(|&v| Complex64::new(libm::sqrt(v), 0.0))
        .collect();
    ComplexField::new(grid, values)?.normalized_power()
}

/// Pixel-mean squared error between two images.
pub fn loss_mse(output: &Image, target: &Image) -> Result<f64> {
    crate::metrics::mse(output, target)
}
