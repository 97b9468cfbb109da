from rest_framework import serializers

from geometry.serializers import PartitionSerializer
from hybrid.serializers import MatrixField
from polysos.certificates import CERTIFICATE_FORMS
from synthesis.models import SynthesisRun
from synthesis.problem import PIECEWISE, POLYSET, TEMPLATE_KINDS

PLOT_FORMATS = ('csv', 'svg', 'both')


class TemplateSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=TEMPLATE_KINDS)
    degree = serializers.IntegerField(required=False, min_value=2)
    partition = serializers.JSONField(required=False)
    partitions = serializers.DictField(child=serializers.JSONField(), required=False)
    tie_pieces = serializers.BooleanField(default=False)
    certificate_form = serializers.ChoiceField(choices=CERTIFICATE_FORMS, required=False)

    def _check_partition(self, data, field):
        partition = PartitionSerializer(data=data)
        if not partition.is_valid():
            raise serializers.ValidationError({field: partition.errors})

    def validate(self, attrs):
        if attrs['kind'] == POLYSET:
            if 'degree' not in attrs:
                raise serializers.ValidationError({'degree': 'This field is required for polyset templates.'})
            if attrs['degree'] % 2:
                raise serializers.ValidationError({'degree': 'Polyset degrees must be even.'})
        if attrs['kind'] == PIECEWISE:
            if 'partition' not in attrs and not attrs.get('partitions'):
                raise serializers.ValidationError(
                    {'partition': 'This field is required for piecewise templates.'})
            if 'partition' in attrs:
                self._check_partition(attrs['partition'], 'partition')
            for node_id, data in attrs.get('partitions', {}).items():
                self._check_partition(data, f'partitions.{node_id}')
        return attrs


class ObjectiveSerializer(serializers.Serializer):
    vertices = MatrixField()
    node = serializers.CharField(required=False)
    coordinates = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False, min_length=1)

    def validate_vertices(self, value):
        if value is None:
            raise serializers.ValidationError('At least one vertex is required.')
        return value

    def validate(self, attrs):
        coordinates = attrs.get('coordinates')
        if coordinates is not None and len(coordinates) != attrs['vertices'].shape[1]:
            raise serializers.ValidationError(
                {'coordinates': f"{len(coordinates)} indices for vertices with {attrs['vertices'].shape[1]} coordinates."})
        return attrs


class PlotSerializer(serializers.Serializer):
    directions = serializers.IntegerField(required=False, min_value=8)
    format = serializers.ChoiceField(choices=PLOT_FORMATS, default='both')
    reference = serializers.CharField(required=False, allow_null=True, default=None)


class RunConfigSerializer(serializers.Serializer):
    """One synthesis run: system file, template, objective, solver options and outputs."""
    label = serializers.CharField(required=False, allow_blank=True, default='')
    system = serializers.CharField()
    template = TemplateSerializer()
    objective = ObjectiveSerializer()
    solver = serializers.DictField(required=False, default=dict)
    output_dir = serializers.CharField(required=False, allow_blank=True, default='')
    plot = PlotSerializer(required=False)
    expected_gamma = serializers.FloatField(required=False, allow_null=True, default=None)


class SynthesisRunSerializer(serializers.ModelSerializer):
    class Meta:
        model = SynthesisRun
        fields = (
            'id',
            'label',
            'template',
            'parameters',
            'gamma',
            'status',
            'verified',
            'fingerprint',
            'solve_seconds',
            'date_added',
        )


class SynthesisRunDetailSerializer(SynthesisRunSerializer):
    class Meta(SynthesisRunSerializer.Meta):
        fields = SynthesisRunSerializer.Meta.fields + ('solution',)
