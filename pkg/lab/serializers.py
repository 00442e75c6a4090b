from rest_framework import serializers
from django.conf import settings

from .utils.corpus import resolve_measure, resolve_target
from .utils.dynamics import INTEGRATORS, SCHEMES
from .utils.network import SignPattern


class CommaSeparatedField(serializers.ListField):
    """A list given either as a list or as 'a,b,c' text."""

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(',') if item.strip()]
        elif not isinstance(data, (list, tuple)):
            data = [data]
        return super().to_internal_value(data)


class TargetMixin(serializers.Serializer):
    target = serializers.CharField(default='half_x1')

    def validate_target(self, value):
        try:
            resolve_target(value)
        except (ValueError, FileNotFoundError) as exc:
            raise serializers.ValidationError(str(exc))
        return value


class SignsMixin(serializers.Serializer):
    m = serializers.IntegerField(min_value=1)
    signs = serializers.CharField(required=False, allow_blank=True, default='')

    def validate(self, attrs):
        attrs = super().validate(attrs)
        text = attrs.get('signs', '')
        try:
            pattern = SignPattern.parse(text) if text else SignPattern.alternating(attrs['m'])
        except ValueError as exc:
            raise serializers.ValidationError({'signs': str(exc)})
        if pattern.m != attrs['m']:
            raise serializers.ValidationError({'signs': f"{pattern.m} signs given for m={attrs['m']}"})
        attrs['sign_pattern'] = pattern
        return attrs


class SmoothSerializer(TargetMixin):
    r = CommaSeparatedField(child=serializers.IntegerField(min_value=1), min_length=1,
                            default=[1, 2, 4, 8, 16, 32, 64])
    cap = serializers.IntegerField(min_value=64, default=settings.LAB_FOURIER_CAP)


class ApproxSerializer(TargetMixin):
    m_under = CommaSeparatedField(child=serializers.IntegerField(min_value=1), min_length=1,
                                  default=[1, 2, 4, 8, 16, 32, 64])


class FitSerializer(TargetMixin, SignsMixin):
    target = serializers.CharField(default='cos2')
    m = serializers.IntegerField(min_value=2, default=18)
    directions = CommaSeparatedField(child=serializers.FloatField(), required=False, default=list)
    n_sets = serializers.IntegerField(min_value=1, default=20)
    max_dirs = serializers.IntegerField(min_value=1, default=8)
    include_linear = serializers.BooleanField(default=True)
    el_tol = serializers.FloatField(min_value=0.0, default=1e-10)


class LocalizeSerializer(TargetMixin, SignsMixin):
    m = serializers.IntegerField(min_value=2, default=4)
    R = CommaSeparatedField(child=serializers.FloatField(min_value=1.0), min_length=1,
                            default=[1e2, 1e3, 1e4])
    normalize = serializers.BooleanField(default=True)
    polish_steps = serializers.IntegerField(min_value=0, default=200)


class FlowSerializer(TargetMixin, SignsMixin):
    m = serializers.IntegerField(min_value=1, default=4)
    measure = serializers.CharField(default='uniform')
    dt = serializers.FloatField(min_value=0.0, default=1e-2)
    T = serializers.FloatField(min_value=0.0, default=10.0)
    integrator = serializers.ChoiceField(choices=INTEGRATORS, default='rk4')
    record_every = serializers.IntegerField(min_value=1, default=1)
    init_scale = serializers.FloatField(min_value=0.0, default=1.0)

    def validate_measure(self, value):
        try:
            resolve_measure(value, 0)
        except ValueError as exc:
            raise serializers.ValidationError(str(exc))
        return value

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs['dt'] <= 0.0 or attrs['T'] <= 0.0:
            raise serializers.ValidationError("dt and T must be positive")
        return attrs


class DivergeSerializer(serializers.Serializer):
    b0 = serializers.FloatField(min_value=1.0, default=1.0)
    T = serializers.FloatField(default=1e11)
    dt = serializers.FloatField(default=1e-3)
    integrator = serializers.ChoiceField(choices=INTEGRATORS, default='rk4')
    threshold = serializers.FloatField(min_value=0.0, default=1e3)

    def validate(self, attrs):
        if attrs['T'] <= 0.0 or attrs['dt'] <= 0.0:
            raise serializers.ValidationError("dt and T must be positive")
        return attrs


class LangevinSerializer(TargetMixin, SignsMixin):
    m = serializers.IntegerField(min_value=1, default=1)
    eps = serializers.FloatField(default=0.5)
    R = serializers.FloatField(default=2.0)
    dt = serializers.FloatField(default=2e-3)
    T = serializers.FloatField(default=40.0)
    n_traj = serializers.IntegerField(min_value=1, default=10000)
    record_every = serializers.IntegerField(min_value=1, default=500)
    init_scale = serializers.FloatField(min_value=0.0, default=1.0)
    marginals = CommaSeparatedField(child=serializers.CharField(), min_length=1, default=['wnorm'])
    bins = serializers.IntegerField(min_value=1, default=20)
    hist_max = serializers.FloatField(required=False)
    compare_stationary = serializers.BooleanField(default=False)
    tv_limit = serializers.FloatField(min_value=0.0, default=0.05)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if not 0.0 < attrs['eps'] <= 1.0:
            raise serializers.ValidationError({'eps': "eps must lie in (0, 1]"})
        for name in ('R', 'dt', 'T'):
            if attrs[name] <= 0.0:
                raise serializers.ValidationError({name: f"{name} must be positive"})
        if attrs['compare_stationary'] and attrs['m'] != 1:
            raise serializers.ValidationError({'compare_stationary': "stationary comparison needs m = 1"})
        if attrs['compare_stationary'] and 'wnorm' not in attrs['marginals']:
            attrs['marginals'] = ['wnorm', *attrs['marginals']]
        attrs.setdefault('hist_max', attrs['R'] + 2.0)
        return attrs


class FokkerPlanckSerializer(TargetMixin):
    eps = serializers.FloatField(default=0.5)
    R = serializers.FloatField(default=2.0)
    n = serializers.IntegerField(min_value=4, default=64)
    T = serializers.FloatField(default=20.0)
    dt = serializers.FloatField(default=1e-2)
    scheme = serializers.ChoiceField(choices=SCHEMES, default='implicit')
    sign = serializers.ChoiceField(choices=[1, -1], default=1)
    r2_min = serializers.FloatField(default=0.999)

    def validate(self, attrs):
        for name in ('eps', 'R', 'T', 'dt'):
            if attrs[name] <= 0.0:
                raise serializers.ValidationError({name: f"{name} must be positive"})
        return attrs


class CertifySerializer(serializers.Serializer):
    m = CommaSeparatedField(child=serializers.IntegerField(min_value=1), min_length=1, default=[2400])
    R = CommaSeparatedField(child=serializers.FloatField(min_value=0.0), min_length=1, default=[10.0])
    eps = CommaSeparatedField(child=serializers.FloatField(min_value=0.0), min_length=1, default=[1.0])


class VerifySerializer(serializers.Serializer):
    labels = CommaSeparatedField(child=serializers.CharField(), default=['lab.tests'])
    failfast = serializers.BooleanField(default=False)
