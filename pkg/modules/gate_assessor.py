"""
Gate verdict module: PASS / WARN / FAIL from compensated gate metrics
"""
import math
from typing import Dict, List, Optional

from config.settings import GATE_FIDELITY_GATES, GATE_PHASE_TOLERANCE, GATE_SUCCESS_GATES

VERDICT_ORDER = ('PASS', 'WARN', 'FAIL')


class GateAssessor:
    """Grades a compensated conditional phase gate and suggests what to change."""

    def assess_gate(
        self,
        name: str,
        residual_phase: float,
        fidelity: float,
        mean_success: float,
        losses: Optional[Dict[str, float]] = None,
        leakage: float = 0.0,
        adiabaticity: Optional[Dict[str, float]] = None
    ) -> Dict:
        """
        Grade one gate.

        Args:
            name: Identifier of the run (preset name or sweep point)
            residual_phase: Phase of the |1,1> channel after compensation (rad)
            fidelity: Average state fidelity after compensation
            mean_success: Mean norm squared over the four logical inputs
            losses: Integrated 'atomic_loss' and 'cavity_loss'
            leakage: Largest population found with two or more photons
            adiabaticity: Ratios from reduction.adiabaticity_ratios

        Returns:
            Assessment dictionary with per-criterion grades and overall verdict
        """
        phase_error = abs(math.remainder(residual_phase - math.pi, 2 * math.pi))
        grades = {
            'phase': self._grade_upper(phase_error, GATE_PHASE_TOLERANCE),
            'fidelity': self._grade_lower(fidelity, GATE_FIDELITY_GATES),
            'success': self._grade_lower(mean_success, GATE_SUCCESS_GATES),
        }
        verdict = self._most_restrictive(grades.values())

        assessment = {
            'name': name,
            'verdict': verdict,
            'phase_error_rad': phase_error,
            'grades': grades,
            'dominant_loss': self._dominant_loss(losses),
            'recommendations': self._generate_recommendations(
                verdict, grades, losses, leakage, adiabaticity
            ),
        }
        return assessment

    def _grade_upper(self, value: float, gates: Dict[str, float]) -> str:
        """Smaller is better."""
        if not math.isfinite(value):
            return 'FAIL'
        if value <= gates['PASS']:
            return 'PASS'
        if value <= gates['WARN']:
            return 'WARN'
        return 'FAIL'

    def _grade_lower(self, value: float, gates: Dict[str, float]) -> str:
        """Larger is better."""
        if not math.isfinite(value):
            return 'FAIL'
        if value >= gates['PASS']:
            return 'PASS'
        if value >= gates['WARN']:
            return 'WARN'
        return 'FAIL'

    def _most_restrictive(self, grades) -> str:
        return max(grades, key=VERDICT_ORDER.index)

    def _dominant_loss(self, losses: Optional[Dict[str, float]]) -> str:
        if not losses:
            return 'none'
        atomic = losses.get('atomic_loss', 0.0)
        cavity = losses.get('cavity_loss', 0.0)
        if atomic == 0.0 and cavity == 0.0:
            return 'none'
        return 'atomic' if atomic >= cavity else 'cavity'

    def _generate_recommendations(
        self,
        verdict: str,
        grades: Dict[str, str],
        losses: Optional[Dict[str, float]],
        leakage: float,
        adiabaticity: Optional[Dict[str, float]]
    ) -> List[str]:
        recommendations = []

        if verdict == 'PASS':
            recommendations.append("✓ Conditional phase gate within tolerance")
        elif verdict == 'WARN':
            recommendations.append("⚠ Gate usable but degraded; check the flagged criteria")
        else:
            recommendations.append("⛔ No usable conditional phase; the gate failed")

        if grades['phase'] != 'PASS':
            recommendations.append(
                "Residual |1,1> phase is off pi; reduce Omega/Delta_L or use the dressed gate timing"
            )
        if grades['success'] != 'PASS':
            dominant = self._dominant_loss(losses)
            if dominant == 'atomic':
                recommendations.append("Norm loss dominated by atomic decay; increase Delta_L to lower |e> population")
            elif dominant == 'cavity':
                recommendations.append("Norm loss dominated by cavity decay; increase delta_C to lower photon population")
        if leakage > 1e-4:
            recommendations.append(f"Two-photon leakage {leakage:.2e}; rerun with a larger n_max")
        if adiabaticity and adiabaticity.get('omega_over_delta_L', 0.0) > 0.3:
            recommendations.append("Drive is far from the adiabatic limit; reduced timing will be inaccurate")

        return recommendations
