"""
Partition JSON.

A partition is given either as a face fan, {"face_fan": [m1, m2]}, or as an
explicit cone list, {"cones": [{"rays": [[...], ...]}, {"H": [[...], ...]}]}.
Explicit cones need rays, an H-representation, or both.
"""
import numpy as np
from rest_framework import serializers

from geometry.cones import PolyhedralCone, cone_from_generators
from geometry.exceptions import GeometryError
from geometry.fans import ConicPartition, compute_adjacency, face_fan
from hybrid.serializers import MatrixField, matrix_to_list


class ConeSerializer(serializers.Serializer):
    rays = MatrixField(required=False, allow_null=True, default=None)
    H = MatrixField(required=False, allow_null=True, default=None)

    def validate(self, attrs):
        if attrs['rays'] is None and attrs['H'] is None:
            raise serializers.ValidationError('A cone needs "rays", "H" or both.')
        return attrs

    def to_representation(self, instance):
        rays, _ = instance.generators()
        return {'rays': matrix_to_list(rays.T), 'H': matrix_to_list(instance.H)}


class PartitionSerializer(serializers.Serializer):
    face_fan = serializers.ListField(child=serializers.IntegerField(), min_length=2, max_length=2, required=False)
    cones = ConeSerializer(many=True, required=False)

    def validate_face_fan(self, value):
        m1, m2 = value
        if m1 < 3:
            raise serializers.ValidationError('m1 must be at least 3.')
        if m2 < 3 or m2 % 2 == 0:
            raise serializers.ValidationError('m2 must be odd and at least 3.')
        return value

    def validate(self, attrs):
        if ('face_fan' in attrs) == ('cones' in attrs):
            raise serializers.ValidationError('Give exactly one of "face_fan" and "cones".')
        if 'cones' in attrs and not attrs['cones']:
            raise serializers.ValidationError({'cones': 'At least one cone is required.'})
        return attrs

    def create(self, validated_data):
        try:
            if 'face_fan' in validated_data:
                return face_fan(*validated_data['face_fan'])
            cones = []
            for entry in validated_data['cones']:
                if entry['H'] is not None:
                    rays = None if entry['rays'] is None else entry['rays'].T
                    lineality = None if rays is None else np.zeros((rays.shape[0], 0))
                    cones.append(PolyhedralCone(entry['H'], rays=rays, lineality=lineality))
                else:
                    cones.append(cone_from_generators(entry['rays'].T))
            return ConicPartition(tuple(cones), compute_adjacency(cones))
        except GeometryError as exc:
            raise serializers.ValidationError(str(exc)) from exc

    def to_representation(self, instance):
        if instance.label.startswith('face_fan('):
            m1, m2 = instance.label[len('face_fan('):-1].split(',')
            return {'face_fan': [int(m1), int(m2)]}
        return {'cones': ConeSerializer(instance.cones, many=True).data}


def load_partition(data):
    serializer = PartitionSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()
