//! Alamouti and quasi-orthogonal space-time block codes.

use crate::linalg::CMatrix;
use crate::Complex64;

/// `[[s1, s2], [−s2*, s1*]]`; row = time slot, column = beam.
pub fn alamouti_encode(s1: Complex64, s2: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[s1, s2, -s2.conj(), s1.conj()])
}

/// Decision statistics `z_k = (|g1|² + |g2|²) s_k + noise` from the two
/// received slots and the effective beam gains.
pub fn alamouti_combine(y: [Complex64; 2], g: [Complex64; 2]) -> [Complex64; 2] {
    let [y1, y2] = y;
    let [g1, g2] = g;
    [g1.conj() * y1 + g2 * y2.conj(), g2.conj() * y1 - g1 * y2.conj()]
}

/// The 4×4 quasi-orthogonal code; row = virtual antenna, column = slot.
pub fn qostbc_encode(s: [Complex64; 4]) -> CMatrix {
    let [s1, s2, s3, s4] = s;
    let c = |z: Complex64| z.conj();
    CMatrix::from_row_slice(
        4,
        4,
        &[
            s1, s2, s3, s4,
            -c(s2), c(s1), -c(s4), c(s3),
            -c(s3), -c(s4), c(s1), c(s2),
            s4, -s3, -s2, s1,
        ],
    )
}

/// Equivalent channel for the QOSTBC received over `y_t = a·C[:, t]`:
/// `(y1, y2*, y3*, y4) = H (s1, s4, s2*, s3*)`.
pub fn qostbc_equivalent_channel(a: [Complex64; 4]) -> CMatrix {
    let [a1, a2, a3, a4] = a;
    let c = |z: Complex64| z.conj();
    CMatrix::from_row_slice(
        4,
        4,
        &[
            a1, a4, -a2, -a3,
            c(a2), -c(a3), c(a1), -c(a4),
            c(a3), -c(a2), -c(a4), c(a1),
            a4, a1, a3, a2,
        ],
    )
}

/// Maps received slots to the equivalent linear model's observation.
pub fn qostbc_observation(y: [Complex64; 4]) -> [Complex64; 4] {
    [y[0], y[1].conj(), y[2].conj(), y[3]]
}

/// Symbols to the equivalent model's unknown vector `(s1, s4, s2*, s3*)`.
pub fn qostbc_unknowns(s: [Complex64; 4]) -> [Complex64; 4] {
    [s[0], s[3], s[1].conj(), s[2].conj()]
}
