"""
JSON system description, validated with DRF serializers.

    {
      "kind": "control",
      "nodes": [{"id": "q", "A": [[...]], "B": [[...]],
                 "safe_set": [[lower...], [upper...]], "input_set": null}],
      "signals": [{"id": "s", "A": [[...]], "B": [[...]], "input_set": [[...], [...]]}],
      "transitions": [{"from": "q", "signal": "s", "to": "q"}]
    }

Algebraic systems use "kind": "algebraic" with C/E in place of A/B and no
input sets. Matrices are row-major nested arrays; an empty array stands for a
zero-row (C, E) or zero-column (B) matrix.
"""
import json
from pathlib import Path

import numpy as np
from rest_framework import serializers

from hybrid.exceptions import HybridSystemError
from hybrid.systems import (
    AlgebraicNode,
    AlgebraicReset,
    Automaton,
    Box,
    ControlNode,
    ControlReset,
    HybridAlgebraicSystem,
    HybridControlSystem,
    Transition,
    as_matrix,
)


def matrix_to_list(matrix):
    return [[float(v) for v in row] for row in np.asarray(matrix)]


def box_to_list(box):
    if box is None:
        return None
    return [box.lower.tolist(), box.upper.tolist()]


class MatrixField(serializers.Field):
    """A row-major nested list of finite numbers; validated as rectangular."""
    default_error_messages = {
        'invalid': 'Expected a list of rows of numbers.',
        'ragged': 'All rows must have the same length.',
        'non_finite': 'Entries must be finite numbers.',
    }

    def to_internal_value(self, data):
        if not isinstance(data, list) or any(not isinstance(row, list) for row in data):
            self.fail('invalid')
        if len({len(row) for row in data}) > 1:
            self.fail('ragged')
        try:
            array = np.array(data, dtype=float)
        except (TypeError, ValueError):
            self.fail('invalid')
        if not np.all(np.isfinite(array)):
            self.fail('non_finite')
        return array if array.size else None

    def to_representation(self, value):
        return matrix_to_list(value)


class BoxField(serializers.Field):
    default_error_messages = {
        'invalid': 'Expected [lower[], upper[]].',
        'bounds': '{message}',
    }

    def to_internal_value(self, data):
        if not isinstance(data, list) or len(data) != 2 or not all(isinstance(side, list) for side in data):
            self.fail('invalid')
        try:
            return Box(data[0], data[1])
        except (TypeError, ValueError) as exc:
            self.fail('bounds', message=str(exc))

    def to_representation(self, value):
        return box_to_list(value)


class TransitionSerializer(serializers.Serializer):
    # "from" is a keyword, so the fields are declared here instead of as attributes
    def get_fields(self):
        return {
            'from': serializers.CharField(),
            'signal': serializers.CharField(),
            'to': serializers.CharField(),
        }

    def to_internal_value(self, data):
        values = super().to_internal_value(data)
        return Transition(values['from'], values['signal'], values['to'])

    def to_representation(self, instance):
        return {'from': instance.source, 'signal': instance.signal, 'to': instance.target}


class ControlNodeSerializer(serializers.Serializer):
    id = serializers.CharField()
    A = MatrixField()
    B = MatrixField(required=False, allow_null=True, default=None)
    safe_set = BoxField()
    input_set = BoxField(required=False, allow_null=True, default=None)

    def validate(self, attrs):
        if attrs['A'] is None:
            raise serializers.ValidationError({'A': 'A cannot be empty.'})
        return attrs


class ControlSignalSerializer(serializers.Serializer):
    id = serializers.CharField()
    A = MatrixField()
    B = MatrixField(required=False, allow_null=True, default=None)
    input_set = BoxField(required=False, allow_null=True, default=None)


class AlgebraicNodeSerializer(serializers.Serializer):
    id = serializers.CharField()
    C = MatrixField(allow_null=True)
    E = MatrixField(allow_null=True)
    safe_set = BoxField()


class AlgebraicSignalSerializer(serializers.Serializer):
    id = serializers.CharField()
    C = MatrixField(allow_null=True)
    E = MatrixField(allow_null=True)


class _SystemSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=['control', 'algebraic'], required=False, default='control')
    transitions = TransitionSerializer(many=True, required=False, default=list)

    def validate(self, attrs):
        for key in ('nodes', 'signals'):
            ids = [item['id'] for item in attrs[key]]
            duplicates = sorted({i for i in ids if ids.count(i) > 1})
            if duplicates:
                raise serializers.ValidationError({key: f"duplicate identifiers: {', '.join(duplicates)}"})
        return attrs

    def _automaton(self, data):
        return Automaton(
            nodes=[node['id'] for node in data['nodes']],
            signals=[signal['id'] for signal in data['signals']],
            transitions=data['transitions'],
        )

    def save(self, **kwargs):
        try:
            return super().save(**kwargs)
        except (HybridSystemError, ValueError) as exc:
            raise serializers.ValidationError({'non_field_errors': [str(exc)]})


class HybridControlSystemSerializer(_SystemSerializer):
    nodes = ControlNodeSerializer(many=True)
    signals = ControlSignalSerializer(many=True, required=False, default=list)

    def create(self, validated_data):
        nodes = {
            node['id']: ControlNode(A=node['A'], B=node['B'], safe_set=node['safe_set'], input_set=node['input_set'])
            for node in validated_data['nodes']
        }
        signals = {
            signal['id']: ControlReset(A=signal['A'], B=signal['B'], input_set=signal['input_set'])
            for signal in validated_data['signals']
        }
        return HybridControlSystem(automaton=self._automaton(validated_data), nodes=nodes, signals=signals)

    def to_representation(self, instance):
        return {
            'kind': 'control',
            'nodes': [
                {'id': node_id, 'A': matrix_to_list(node.A), 'B': matrix_to_list(node.B),
                 'safe_set': box_to_list(node.safe_set), 'input_set': box_to_list(node.input_set)}
                for node_id, node in instance.nodes.items()
            ],
            'signals': [
                {'id': signal_id, 'A': matrix_to_list(reset.A), 'B': matrix_to_list(reset.B),
                 'input_set': box_to_list(reset.input_set)}
                for signal_id, reset in instance.signals.items()
            ],
            'transitions': TransitionSerializer(instance.automaton.transitions, many=True).data,
        }


class HybridAlgebraicSystemSerializer(_SystemSerializer):
    nodes = AlgebraicNodeSerializer(many=True)
    signals = AlgebraicSignalSerializer(many=True, required=False, default=list)

    def create(self, validated_data):
        nodes = {
            node['id']: AlgebraicNode(C=node['C'], E=node['E'], safe_set=node['safe_set'])
            for node in validated_data['nodes']
        }
        dims = {node_id: node.state_dim for node_id, node in nodes.items()}
        shapes = {}
        for transition in validated_data['transitions']:
            if transition.source in dims and transition.target in dims:
                shapes.setdefault(transition.signal, (dims[transition.source], dims[transition.target]))
        signals = {}
        for signal in validated_data['signals']:
            n_source, n_target = shapes.get(signal['id'], (0, 0))
            signals[signal['id']] = AlgebraicReset(
                C=as_matrix(signal['C'], rows=0, cols=n_source, name='C'),
                E=as_matrix(signal['E'], rows=0, cols=n_target, name='E'),
            )
        return HybridAlgebraicSystem(automaton=self._automaton(validated_data), nodes=nodes, signals=signals)

    def to_representation(self, instance):
        return {
            'kind': 'algebraic',
            'nodes': [
                {'id': node_id, 'C': matrix_to_list(node.C), 'E': matrix_to_list(node.E),
                 'safe_set': box_to_list(node.safe_set)}
                for node_id, node in instance.nodes.items()
            ],
            'signals': [
                {'id': signal_id, 'C': matrix_to_list(reset.C), 'E': matrix_to_list(reset.E)}
                for signal_id, reset in instance.signals.items()
            ],
            'transitions': TransitionSerializer(instance.automaton.transitions, many=True).data,
        }


SERIALIZERS = {
    'control': HybridControlSystemSerializer,
    'algebraic': HybridAlgebraicSystemSerializer,
}


def load_system(data):
    """Validate a parsed system description and build the matching system; raises ValidationError."""
    kind = data.get('kind', 'control') if isinstance(data, dict) else None
    if kind not in SERIALIZERS:
        raise serializers.ValidationError({'kind': f"expected one of {sorted(SERIALIZERS)}"})
    serializer = SERIALIZERS[kind](data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def dump_system(system):
    return SERIALIZERS[system.kind](system).data


def read_system_file(path):
    with open(path) as handle:
        return load_system(json.load(handle))


def write_system_file(system, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(dump_system(system), indent=2) + "\n")
    return path
