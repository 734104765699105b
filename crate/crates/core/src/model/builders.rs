//! Builders for the standard example systems.
//!
//! Coupled qubit-resonator models are assembled in the product basis
//! `|n, j> -> n * Q + j` (photon number `n`, qubit level `j`), diagonalized,
//! and returned in the dressed eigenbasis. Dissipation is added per dressed
//! transition `|i><j|` (secular form) with rate `gamma |<i|C|j>|^2` for each
//! bath coupling operator `C`, plus detailed-balance partners when `T > 0`.

use nalgebra::DMatrix;

use super::{beta_of, with_detailed_balance, Channel, LindbladModel, ObservableSpec};
use crate::error::{Error, Result};
use crate::operator::{Operator, C64};

/// Dressed transitions weaker than this fraction of the bath rate are skipped.
const TRANSITION_FLOOR: f64 = 1e-14;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Truncated annihilation operator on `levels` Fock states.
pub fn lowering_operator(levels: usize) -> Operator {
    Operator::from_fn(levels, |i, j| if j == i + 1 { re((j as f64).sqrt()) } else { re(0.0) })
}

/// Driven damped oscillator `w_r a^dag a + zeta (a e^{i w_d t} + h.c.)` with
/// decay `sqrt(kappa) a` (and thermal excitation at `kappa e^{-beta w_r}`).
pub fn driven_oscillator(omega_r: f64, zeta: f64, omega_d: f64, levels: usize, kappa: f64, temperature: f64) -> Result<LindbladModel> {
    if levels < 2 {
        return Err(Error::InvalidModel(format!("oscillator needs at least 2 levels, got {levels}")));
    }
    let energies: Vec<f64> = (0..levels).map(|n| n as f64 * omega_r).collect();
    let drives = (1..levels).map(|n| (n - 1, n, re(zeta * (n as f64).sqrt())));
    let decay = Channel {
        op: lowering_operator(levels),
        rate: kappa,
        omega: omega_r,
    };
    let channels = with_detailed_balance(vec![decay], beta_of(temperature));
    LindbladModel::new(energies, drives, channels, temperature, omega_d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreeLevelRates {
    pub gamma_10: f64,
    pub gamma_20: f64,
    pub gamma_21: f64,
    /// Pure dephasing applied to levels 1 and 2; zero disables it.
    pub dephasing: f64,
    pub temperature: f64,
}

/// Three-level system with drive `V01 |0><1| + V02 |0><2| + V12 |1><2|`.
pub fn three_level(energies: [f64; 3], v01: C64, v02: C64, v12: C64, rates: &ThreeLevelRates, omega_d: f64) -> Result<LindbladModel> {
    let e = energies.to_vec();
    let mut channels = Vec::new();
    for (n, m, g) in [(0, 1, rates.gamma_10), (0, 2, rates.gamma_20), (1, 2, rates.gamma_21)] {
        if g > 0.0 {
            channels.push(Channel::transition(&e, n, m, g));
        }
    }
    let mut channels = with_detailed_balance(channels, beta_of(rates.temperature));
    if rates.dephasing > 0.0 {
        channels.push(Channel::dephasing(3, 1, rates.dephasing));
        channels.push(Channel::dephasing(3, 2, rates.dephasing));
    }
    LindbladModel::new(e, [(0, 1, v01), (0, 2, v02), (1, 2, v12)], channels, rates.temperature, omega_d)
}

/// A qubit-resonator model in its dressed basis.
#[derive(Clone, Debug)]
pub struct CoupledSystem {
    pub model: LindbladModel,
    /// Resonator annihilation operator in the dressed basis.
    pub resonator_lowering: Operator,
    /// Kept dressed states as product-basis columns.
    pub basis: DMatrix<C64>,
    /// Undriven coupled Hamiltonian in the product basis.
    pub product_hamiltonian: DMatrix<C64>,
    pub photon_levels: usize,
    pub qubit_levels: usize,
}

impl CoupledSystem {
    /// `|Tr(a rho)|` observable.
    pub fn transmission(&self) -> ObservableSpec {
        ObservableSpec::new("a", self.resonator_lowering.clone())
    }

    /// Photon and qubit quantum numbers of the product state with the
    /// largest overlap with dressed state `k`.
    pub fn dominant_product_state(&self, k: usize) -> (usize, usize) {
        let p = self.basis.column(k).icamax();
        (p / self.qubit_levels, p % self.qubit_levels)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransmonResonator {
    pub omega_r: f64,
    /// Bare transmon energies `w_j`, ascending.
    pub qubit_energies: Vec<f64>,
    /// `g_j` couples `|j> <-> |j+1>`; length `qubit_energies.len() - 1`.
    pub couplings: Vec<f64>,
    pub zeta: f64,
    pub omega_d: f64,
    pub photon_levels: usize,
    /// Number of dressed states kept; `None` keeps all.
    pub dim: Option<usize>,
    pub kappa: f64,
    pub qubit_decay: f64,
    pub temperature: f64,
}

/// Extended Jaynes-Cummings model
/// `w_r a^dag a + sum w_j |j><j| + sum g_j (a |j+1><j| + h.c.)` driven through `zeta a`.
pub fn transmon_resonator(p: &TransmonResonator) -> Result<CoupledSystem> {
    let q = p.qubit_energies.len();
    if q < 2 || p.couplings.len() != q - 1 {
        return Err(Error::InvalidModel(
            "need >= 2 transmon levels and one coupling per neighbor pair".into(),
        ));
    }
    let mut coupling = DMatrix::zeros(q, q);
    for (j, &g) in p.couplings.iter().enumerate() {
        coupling[(j + 1, j)] = re(g);
    }
    let mut decay = DMatrix::zeros(q, q);
    for j in 0..q - 1 {
        decay[(j, j + 1)] = re(((j + 1) as f64).sqrt());
    }
    assemble(&Assembly {
        omega_r: p.omega_r,
        qubit_energies: &p.qubit_energies,
        raising_coupling: coupling,
        counter_rotating: false,
        qubit_bath: decay,
        zeta: p.zeta,
        omega_d: p.omega_d,
        photon_levels: p.photon_levels,
        dim: p.dim,
        kappa: p.kappa,
        qubit_decay: p.qubit_decay,
        temperature: p.temperature,
    })
}

/// Which parts of `g N (a + a^dag)` enter the fluxonium-resonator coupling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    /// `g sum_{j,j'} (<j|N|j'> |j><j'| a + h.c.)`, all terms.
    #[default]
    Full,
    /// Only terms raising the qubit while absorbing a photon (and their
    /// conjugates); reduces to the transmon form for nearest-neighbor `N`.
    RotatingWave,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluxoniumResonator {
    pub omega_r: f64,
    /// Fluxonium eigenenergies `E_j`, ascending.
    pub qubit_energies: Vec<f64>,
    /// Hermitian charge matrix `<j|N|j'>`.
    pub charge_matrix: DMatrix<C64>,
    pub g: f64,
    pub zeta: f64,
    pub omega_d: f64,
    pub photon_levels: usize,
    pub dim: Option<usize>,
    pub kappa: f64,
    /// Qubit relaxation scale; dressed rates go as `|<i|N|j>|^2`.
    pub qubit_decay: f64,
    pub temperature: f64,
    pub coupling: CouplingForm,
}

/// Fluxonium coupled to a resonator through its charge operator.
pub fn fluxonium_resonator(p: &FluxoniumResonator) -> Result<CoupledSystem> {
    let q = p.qubit_energies.len();
    let n = &p.charge_matrix;
    if n.nrows() != q || n.ncols() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            found: n.nrows(),
        });
    }
    if !Operator::from_matrix(n.clone())?.is_hermitian(1e-12 * n.camax().max(1.0)) {
        return Err(Error::InvalidModel("charge matrix must be Hermitian".into()));
    }
    let (raising, counter) = match p.coupling {
        CouplingForm::Full => (n * re(p.g), true),
        CouplingForm::RotatingWave => (DMatrix::from_fn(q, q, |i, j| if i > j { n[(i, j)] * p.g } else { re(0.0) }), false),
    };
    assemble(&Assembly {
        omega_r: p.omega_r,
        qubit_energies: &p.qubit_energies,
        raising_coupling: raising,
        counter_rotating: counter,
        qubit_bath: n.clone(),
        zeta: p.zeta,
        omega_d: p.omega_d,
        photon_levels: p.photon_levels,
        dim: p.dim,
        kappa: p.kappa,
        qubit_decay: p.qubit_decay,
        temperature: p.temperature,
    })
}

struct Assembly<'a> {
    omega_r: f64,
    qubit_energies: &'a [f64],
    /// `Q x Q` matrix `C`; the coupling is `C (x) a + h.c.`, plus
    /// `C (x) a^dag + h.c.` when `counter_rotating`.
    raising_coupling: DMatrix<C64>,
    counter_rotating: bool,
    qubit_bath: DMatrix<C64>,
    zeta: f64,
    omega_d: f64,
    photon_levels: usize,
    dim: Option<usize>,
    kappa: f64,
    qubit_decay: f64,
    temperature: f64,
}

/// `A (x) B` in the `n * Q + j` ordering, where `A` acts on photons.
fn product(photon: &DMatrix<C64>, qubit: &DMatrix<C64>) -> DMatrix<C64> {
    photon.kronecker(qubit)
}

fn assemble(a: &Assembly<'_>) -> Result<CoupledSystem> {
    let q = a.qubit_energies.len();
    let nph = a.photon_levels;
    if nph < 2 {
        return Err(Error::InvalidModel("need at least 2 photon levels".into()));
    }
    if a.qubit_energies.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidModel("qubit energies must be ascending".into()));
    }
    let total = nph * q;
    let keep = a.dim.unwrap_or(total);
    if keep == 0 || keep > total {
        return Err(Error::InvalidModel(format!("cannot keep {keep} of {total} dressed states")));
    }

    let id_q = DMatrix::<C64>::identity(q, q);
    let id_r = DMatrix::<C64>::identity(nph, nph);
    let a_r = lowering_operator(nph).into_matrix();
    let number = DMatrix::from_fn(nph, nph, |i, j| if i == j { re(i as f64) } else { re(0.0) });
    let hq = DMatrix::from_fn(q, q, |i, j| if i == j { re(a.qubit_energies[i]) } else { re(0.0) });

    let mut h = product(&number, &id_q) * re(a.omega_r) + product(&id_r, &hq);
    let mut cpl = product(&a_r, &a.raising_coupling);
    if a.counter_rotating {
        cpl += product(&a_r.adjoint(), &a.raising_coupling);
    }
    h += &cpl + cpl.adjoint();
    let h = (&h + h.adjoint()) * re(0.5);

    let (energies, basis) = dress(&h, keep)?;
    let to_dressed = |m: &DMatrix<C64>| basis.adjoint() * m * &basis;

    let a_full = product(&a_r, &id_q);
    let a_dressed = to_dressed(&a_full);
    let drive = &a_dressed * re(a.zeta);
    let drives: Vec<(usize, usize, C64)> = (0..keep)
        .flat_map(|i| ((i + 1)..keep).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, drive[(i, j)]))
        .filter(|(_, _, v)| v.norm() > 0.0)
        .collect();

    let mut channels = Vec::new();
    let baths = [
        (a_dressed.clone(), a.kappa),
        (to_dressed(&product(&id_r, &a.qubit_bath)), a.qubit_decay),
    ];
    let spread = energies.last().unwrap() - energies[0];
    for (op, rate) in baths.iter() {
        if *rate <= 0.0 {
            continue;
        }
        for j in 0..keep {
            for i in 0..j {
                let gap = energies[j] - energies[i];
                if gap <= 1e-12 * spread.max(1e-300) {
                    continue;
                }
                let w = op[(i, j)].norm_sqr();
                if w <= TRANSITION_FLOOR {
                    continue;
                }
                channels.push(Channel::transition(&energies, i, j, rate * w));
            }
        }
    }
    let channels = with_detailed_balance(channels, beta_of(a.temperature));
    let model = LindbladModel::new(energies, drives, channels, a.temperature, a.omega_d)?;
    Ok(CoupledSystem {
        model,
        resonator_lowering: Operator::from_matrix(a_dressed)?,
        basis,
        product_hamiltonian: h,
        photon_levels: nph,
        qubit_levels: q,
    })
}

/// Ascending eigenpairs of a Hermitian matrix, lowest `keep` retained.
/// Near-degenerate states are ordered by their dominant product-basis index;
/// each eigenvector's largest component is made real and positive.
fn dress(h: &DMatrix<C64>, keep: usize) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = h.nrows();
    let is_diagonal = (0..n).all(|i| (0..n).all(|j| i == j || h[(i, j)].norm() == 0.0));
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if is_diagonal {
        ((0..n).map(|i| h[(i, i)].re).collect(), DMatrix::identity(n, n))
    } else {
        let eig = nalgebra::SymmetricEigen::try_new(h.clone(), 1e-15, 0).ok_or(Error::Diagonalization)?;
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let dominant = |k: usize| vectors.column(k).icamax();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        let (ex, ey) = (values[x], values[y]);
        if (ex - ey).abs() <= 1e-9 * scale {
            dominant(x).cmp(&dominant(y))
        } else {
            ex.total_cmp(&ey)
        }
    });
    let order = &order[..keep];
    let energies: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut basis = DMatrix::zeros(n, keep);
    for (col, &k) in order.iter().enumerate() {
        let v = vectors.column(k);
        let big = v[v.icamax()];
        let phase = big.conj() / big.norm();
        basis.set_column(col, &(v * phase));
    }
    Ok((energies, basis))
}
