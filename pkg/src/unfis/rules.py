"""Human-readable unstructured rules extracted from a trained model."""

import json
from dataclasses import asdict, dataclass

from .core import active_feature_count

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class Antecedent:
    feature: str
    gate: float
    center: float
    width: float
    selected: bool


@dataclass(frozen=True)
class Consequent:
    label: str
    bias: float
    coefficients: tuple  # gate * alpha per feature, original input units


@dataclass(frozen=True)
class Rule:
    index: int
    antecedents: tuple
    active_features: float
    consequents: tuple

    @property
    def length(self):
        return sum(a.selected for a in self.antecedents)


@dataclass(frozen=True)
class RuleReport:
    threshold: float
    rules: tuple

    def to_document(self):
        return {"format": "unfis-rules", "version": 1, **asdict(self)}

    def to_json(self):
        return json.dumps(self.to_document(), indent=1)


def extract_rules(model, threshold=DEFAULT_THRESHOLD):
    """Rule report for a TrainedModel.

    Centers, widths and consequents are mapped back to the original input
    units; a feature is part of a rule's antecedent when its gate reaches
    ``threshold``. Rendered consequents list only the selected features'
    terms; the bias absorbs the normalization offsets of every feature.
    """
    if not 0 < threshold < 1:
        raise ValueError("selection threshold must lie in (0, 1)")
    p = model.params
    gates = p.gates()
    centers = model.normalization.invert(p.centers)
    widths = p.widths * model.normalization.scale
    n_af = active_feature_count(p)
    mean, scale = model.normalization.mean, model.normalization.scale
    rules = []
    for i in range(p.R):
        antecedents = tuple(
            Antecedent(name, float(gates[i, j]), float(centers[i, j]), float(widths[i, j]),
                       bool(gates[i, j] >= threshold))
            for j, name in enumerate(model.feature_names)
        )
        consequents = []
        for c, label in enumerate(model.class_names):
            w = gates[i] * p.consequents[i, c, 1:] / scale
            bias = p.consequents[i, c, 0] - float(w @ mean)
            consequents.append(Consequent(str(label), float(bias), tuple(float(v) for v in w)))
        rules.append(Rule(i + 1, antecedents, float(n_af[i]), tuple(consequents)))
    return RuleReport(float(threshold), tuple(rules))


def _num(v):
    return f"{v:.4g}"


def render_text(report):
    lines = []
    for rule in sorted(report.rules, key=lambda r: r.index):
        total = len(rule.antecedents)
        lines.append(f"Rule {rule.index}: {rule.length} of {total} features selected "
                     f"(active features {rule.active_features:.2f})")
        chosen = [a for a in rule.antecedents if a.selected]
        ignored = [a for a in rule.antecedents if not a.selected]
        if not chosen:
            lines.append("  IF (always)")
        for k, a in enumerate(chosen):
            word = "IF" if k == 0 else "AND"
            lines.append(f"  {word:>3} {a.feature} is around {_num(a.center)} +/- {_num(a.width)}"
                         f"  [gate {a.gate:.3f}]")
        for a in ignored:
            lines.append(f"      ({a.feature} is anything)  [gate {a.gate:.3f}]")
        lines.append("  THEN")
        names = [a.feature for a in rule.antecedents]
        for c in rule.consequents:
            terms = [f"{_num(w)}*{name}" for w, name, a in zip(c.coefficients, names, rule.antecedents)
                     if a.selected]
            body = " + ".join([_num(c.bias), *terms])
            lines.append(f"    y[{c.label}] = {body}")
        lines.append("")
    return "\n".join(lines)

