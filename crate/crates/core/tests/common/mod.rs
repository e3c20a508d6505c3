//! Hand-expanded component form of the seven-level ladder master
//! equation, `d rho/dt = +i[H, rho] + relaxation`, written out entry by
//! entry in one-based notation. Nothing here is assembled from operators:
//! every derivative is an explicit scalar expression, so a structural bug
//! in the generator cannot cancel against itself when the two are
//! compared.

#![allow(dead_code)]

use thincell_core::nalgebra::Complex;

pub type C = Complex<f64>;

/// One-based density matrix: `rho[i][j]` holds rho_ij for i, j in 1..=7;
/// row and column zero are unused padding.
pub type Rho = [[C; 8]; 8];

/// Rates, splittings and drive amplitudes of the bare ladder (no wall
/// rate, no self-broadening), in the convention where every symbol is an
/// angular frequency.
#[derive(Clone, Copy, Debug)]
pub struct LadderParams {
    pub omega_hfs: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta_p: f64,
    pub delta_c: f64,
    pub gamma12: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    pub gamma6: f64,
    pub gamma7: f64,
    pub omega_p: f64,
    pub omega_c45: f64,
    pub omega_c46: f64,
    pub omega_c47: f64,
}

pub fn zero_rho() -> Rho {
    [[C::new(0.0, 0.0); 8]; 8]
}

/// Time derivative of every matrix element, one explicit equation per
/// entry. Populations decay at the bare rates and feed the level below
/// (the upper 4D levels feed both 5P levels, the 5P levels feed the
/// ground pair, the ground levels exchange at `gamma12`); every coherence
/// decays at half the sum of its endpoint rates and rotates at the energy
/// difference; the drives couple 2-4 and 4-5/6/7 with real amplitudes.
pub fn ladder_derivative(p: &LadderParams, r: &Rho) -> Rho {
    let i = C::new(0.0, 1.0);
    let re = |x: f64| C::new(x, 0.0);
    let gh = p.omega_hfs;
    let d1 = p.delta1;
    let d2 = p.delta2;
    let d3 = p.delta3;
    let dp = p.delta_p;
    let dc = p.delta_c;
    let g12 = p.gamma12;
    let g3 = p.gamma3;
    let g4 = p.gamma4;
    let g5 = p.gamma5;
    let g6 = p.gamma6;
    let g7 = p.gamma7;
    let op = p.omega_p;
    let o45 = p.omega_c45;
    let o46 = p.omega_c46;
    let o47 = p.omega_c47;

    let mut d = zero_rho();

    d[1][1] = -re(g12) * r[1][1] + re(g3) * r[3][3] + re(g12) * r[2][2];
    d[1][2] = -re(g12) * r[1][2] - i * (re(gh) * r[1][2] + re(op) * r[1][4]);
    d[1][3] = -re(0.5) * r[1][3] * (re(g12 + g3) - i * re(2.0 * (d1 - dp - gh)));
    d[1][4] = re(0.5)
        * (-re(g12) * r[1][4]
            - re(g4) * r[1][4]
            - re(2.0)
                * i
                * (re(dp) * r[1][4]
                    + r[1][5] * re(o45)
                    + r[1][6] * re(o46)
                    + r[1][7] * re(o47)
                    + r[1][4] * re(gh)
                    + r[1][2] * re(op)));
    d[1][5] = re(0.5)
        * (-re(g12) * r[1][5]
            - re(g5) * r[1][5]
            - re(2.0)
                * i
                * (re(d2) * r[1][5]
                    + re(d3) * r[1][5]
                    + re(dc) * r[1][5]
                    + re(dp) * r[1][5]
                    + r[1][4] * re(o45)
                    + r[1][5] * re(gh)));
    d[1][6] = re(0.5)
        * (-re(g12) * r[1][6]
            - re(g6) * r[1][6]
            - re(2.0)
                * i
                * (re(d3) * r[1][6]
                    + re(dc) * r[1][6]
                    + re(dp) * r[1][6]
                    + r[1][4] * re(o46)
                    + r[1][6] * re(gh)));
    d[1][7] = re(0.5)
        * (-re(g12) * r[1][7]
            - re(g7) * r[1][7]
            - re(2.0)
                * i
                * (re(dc) * r[1][7] + re(dp) * r[1][7] + r[1][4] * re(o47) + r[1][7] * re(gh)));

    d[2][1] = -re(g12) * r[2][1] + i * (r[2][1] * re(gh) + r[4][1] * re(op));
    d[2][2] = -re(g12) * r[2][2] - i * (r[2][4] - r[4][2]) * re(op)
        + re(g3) * r[3][3]
        + re(g4) * r[4][4]
        + re(g12) * r[1][1];
    d[2][3] = -re(0.5 * (g12 + g3)) * r[2][3] + i * re(d1 - dp) * r[2][3] + i * r[4][3] * re(op);
    d[2][4] = re(0.5)
        * (-(re(g12 + g4) + re(2.0) * i * re(dp)) * r[2][4]
            - re(2.0)
                * i
                * (r[2][5] * re(o45)
                    + r[2][6] * re(o46)
                    + r[2][7] * re(o47)
                    + re(op) * (r[2][2] - r[4][4])));
    d[2][5] = -re(0.5 * (g12 + g5)) * r[2][5]
        - i * re(d2 + d3 + dc + dp) * r[2][5]
        - i * r[2][4] * re(o45)
        + i * r[4][5] * re(op);
    d[2][6] =
        -re(0.5 * (g12 + g6)) * r[2][6] - i * re(d3 + dc + dp) * r[2][6] - i * r[2][4] * re(o46)
            + i * r[4][6] * re(op);
    d[2][7] = re(0.5)
        * (-re(g12) * r[2][7]
            - re(g7) * r[2][7]
            - re(2.0)
                * i
                * (re(dc) * r[2][7] + re(dp) * r[2][7] + r[2][4] * re(o47) - r[4][7] * re(op)));

    d[3][1] = -re(0.5) * r[3][1] * (re(g12 + g3) + re(2.0) * i * re(d1 - dp - gh));
    d[3][2] = -re(0.5 * (g12 + g3)) * r[3][2] + i * re(-d1 + dp) * r[3][2] - i * r[3][4] * re(op);
    d[3][3] = -re(g3) * r[3][3] + re(g5) * r[5][5] + re(g6) * r[6][6];
    d[3][4] = re(0.5)
        * (-re(g3) * r[3][4]
            - re(g4) * r[3][4]
            - re(2.0)
                * i
                * (re(d1) * r[3][4]
                    + r[3][5] * re(o45)
                    + r[3][6] * re(o46)
                    + r[3][7] * re(o47)
                    + r[3][2] * re(op)));
    d[3][5] = -re(0.5 * (g3 + g5)) * r[3][5]
        - i * re(d1 + d2 + d3 + dc) * r[3][5]
        - i * r[3][4] * re(o45);
    d[3][6] =
        -re(0.5 * (g3 + g6)) * r[3][6] - i * re(d1 + d3 + dc) * r[3][6] - i * r[3][4] * re(o46);
    d[3][7] = re(0.5)
        * (-re(g3) * r[3][7]
            - re(g7) * r[3][7]
            - re(2.0) * i * (re(d1) * r[3][7] + re(dc) * r[3][7] + r[3][4] * re(o47)));

    d[4][1] = re(0.5)
        * (-re(g12) * r[4][1] - re(g4) * r[4][1]
            + re(2.0)
                * i
                * (re(dp) * r[4][1]
                    + r[5][1] * re(o45)
                    + r[6][1] * re(o46)
                    + r[7][1] * re(o47)
                    + r[4][1] * re(gh)
                    + r[2][1] * re(op)));
    d[4][2] = re(0.5)
        * (-re(g12) * r[4][2] - re(g4) * r[4][2]
            + re(2.0)
                * i
                * (re(dp) * r[4][2]
                    + r[5][2] * re(o45)
                    + r[6][2] * re(o46)
                    + r[7][2] * re(o47)
                    + r[2][2] * re(op)
                    - r[4][4] * re(op)));
    d[4][3] = re(0.5)
        * (-re(g3) * r[4][3] - re(g4) * r[4][3]
            + re(2.0)
                * i
                * (re(d1) * r[4][3]
                    + r[5][3] * re(o45)
                    + r[6][3] * re(o46)
                    + r[7][3] * re(o47)
                    + r[2][3] * re(op)));
    d[4][4] = i
        * ((r[5][4] - r[4][5]) * re(o45)
            + re(o46) * (r[6][4] - r[4][6])
            + re(o47) * (r[7][4] - r[4][7])
            + re(op) * (r[2][4] - r[4][2]))
        + re(g5) * r[5][5]
        + re(g6) * r[6][6]
        - re(g4) * r[4][4];
    d[4][5] =
        -re(0.5 * (g4 + g5)) * r[4][5] - i * re(d2 + d3 + dc) * r[4][5] - i * r[4][4] * re(o45)
            + i * r[5][5] * re(o45)
            + i * r[6][5] * re(o46)
            + i * r[7][5] * re(o47)
            + i * r[2][5] * re(op);
    d[4][6] = re(0.5)
        * (-re(g4) * r[4][6]
            - re(g6) * r[4][6]
            - re(2.0)
                * i
                * (re(d3) * r[4][6] + re(dc) * r[4][6] - r[5][6] * re(o45) + r[4][4] * re(o46)
                    - r[6][6] * re(o46)
                    - r[7][6] * re(o47)
                    - r[2][6] * re(op)));
    d[4][7] = re(0.5)
        * (-re(g4) * r[4][7]
            - re(g7) * r[4][7]
            - re(2.0)
                * i
                * (re(dc) * r[4][7] - r[5][7] * re(o45) - r[6][7] * re(o46) + r[4][4] * re(o47)
                    - r[7][7] * re(o47)
                    - r[2][7] * re(op)));

    d[5][1] = -re(0.5 * (g12 + g5)) * r[5][1]
        + i * r[4][1] * re(o45)
        + i * r[5][1] * re(d2 + d3 + dc + dp + gh);
    d[5][2] = -re(0.5 * (g12 + g5)) * r[5][2]
        + i * re(d2 + d3 + dc + dp) * r[5][2]
        + i * r[4][2] * re(o45)
        - i * r[5][4] * re(op);
    d[5][3] = -re(0.5 * (g3 + g5)) * r[5][3]
        + i * re(d1 + d2 + d3 + dc) * r[5][3]
        + i * r[4][3] * re(o45);
    d[5][4] = -re(0.5 * (g4 + g5)) * r[5][4]
        + i * (re(d2) * r[5][4] + re(d3) * r[5][4] + re(dc) * r[5][4] + r[4][4] * re(o45)
            - r[5][5] * re(o45)
            - r[5][6] * re(o46)
            - r[5][7] * re(o47)
            - r[5][2] * re(op));
    d[5][5] = -re(g5) * r[5][5] + i * (r[4][5] - r[5][4]) * re(o45);
    d[5][6] = re(0.5)
        * (-re(g5) * r[5][6] - re(g6) * r[5][6]
            + re(2.0) * i * (re(d2) * r[5][6] + r[4][6] * re(o45) - r[5][4] * re(o46)));
    d[5][7] = -re(0.5 * (g5 + g7)) * r[5][7] + i * re(d2 + d3) * r[5][7] + i * r[4][7] * re(o45)
        - i * r[5][4] * re(o47);

    d[6][1] = -re(0.5 * (g12 + g6)) * r[6][1]
        + i * r[4][1] * re(o46)
        + i * r[6][1] * re(d3 + dc + dp + gh);
    d[6][2] =
        -re(0.5 * (g12 + g6)) * r[6][2] + i * re(d3 + dc + dp) * r[6][2] + i * r[4][2] * re(o46)
            - i * r[6][4] * re(op);
    d[6][3] =
        -re(0.5 * (g3 + g6)) * r[6][3] + i * re(d1 + d3 + dc) * r[6][3] + i * r[4][3] * re(o46);
    d[6][4] = -re(0.5 * (g4 + g6)) * r[6][4]
        + i * (re(d3) * r[6][4] + re(dc) * r[6][4] - r[6][5] * re(o45) + r[4][4] * re(o46)
            - r[6][6] * re(o46)
            - r[6][7] * re(o47)
            - r[6][2] * re(op));
    d[6][5] = re(0.5)
        * (-re(g5) * r[6][5]
            - re(g6) * r[6][5]
            - re(2.0) * i * (re(d2) * r[6][5] + r[6][4] * re(o45) - r[4][5] * re(o46)));
    d[6][6] = -re(g6) * r[6][6] + i * (r[4][6] - r[6][4]) * re(o46);
    d[6][7] = re(0.5)
        * (-re(g6) * r[6][7] - re(g7) * r[6][7]
            + re(2.0) * i * (re(d3) * r[6][7] + r[4][7] * re(o46) - r[6][4] * re(o47)));

    d[7][1] =
        -re(0.5 * (g12 + g7)) * r[7][1] + i * r[4][1] * re(o47) + i * r[7][1] * re(dc + dp + gh);
    d[7][2] = -re(0.5 * (g12 + g7)) * r[7][2] + i * re(dc + dp) * r[7][2] + i * r[4][2] * re(o47)
        - i * r[7][4] * re(op);
    d[7][3] = -re(0.5 * (g3 + g7)) * r[7][3] + i * re(d1 + dc) * r[7][3] + i * r[4][3] * re(o47);
    d[7][4] = re(0.5)
        * (-re(g4) * r[7][4] - re(g7) * r[7][4]
            + re(2.0)
                * i
                * (re(dc) * r[7][4] - r[7][5] * re(o45) - r[7][6] * re(o46) + r[4][4] * re(o47)
                    - r[7][7] * re(o47)
                    - r[7][2] * re(op)));
    d[7][5] = re(0.5)
        * (-re(g5) * r[7][5]
            - re(g7) * r[7][5]
            - re(2.0)
                * i
                * (re(d2) * r[7][5] + re(d3) * r[7][5] + r[7][4] * re(o45) - r[4][5] * re(o47)));
    d[7][6] = re(0.5)
        * (-re(g6) * r[7][6]
            - re(g7) * r[7][6]
            - re(2.0) * i * (re(d3) * r[7][6] + r[7][4] * re(o46) - r[4][6] * re(o47)));
    d[7][7] = -re(g7) * r[7][7] + i * (r[4][7] - r[7][4]) * re(o47);

    d
}
