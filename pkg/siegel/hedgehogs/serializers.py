"""
Django REST Framework serializers for every JSON document the hedgehogs
application reads or writes.
"""

from mpmath import mp, mpc, mpf
from rest_framework import serializers

from .compacta import MIN_RESOLUTION
from .germs import FAMILIES
from .rotation import TAILS, RotationNumber
from .series import DOUBLE_BITS, TruncatedGerm


def _digits(bits: int) -> int:
    return int(bits * 0.30103) + 2


class ComplexField(serializers.Field):
    """Complex number as [re, im]"""

    default_error_messages = {
        'invalid': 'Expected a pair [re, im] of numbers.',
    }

    def to_representation(self, value):
        value = complex(value)
        return [value.real, value.imag]

    def to_internal_value(self, data):
        if not isinstance(data, (list, tuple)) or len(data) != 2:
            self.fail('invalid')
        try:
            return complex(float(data[0]), float(data[1]))
        except (TypeError, ValueError):
            self.fail('invalid')


class GermSerializer(serializers.Serializer):
    """{"order", "coeffs": [[re, im], ...], "tag", "precision_bits"}"""
    order = serializers.IntegerField(min_value=2)
    coeffs = serializers.ListField(child=serializers.ListField(min_length=2, max_length=2), allow_empty=False)
    tag = serializers.CharField(allow_blank=True, required=False, default='')
    precision_bits = serializers.IntegerField(min_value=DOUBLE_BITS, max_value=8192, required=False,
                                              default=DOUBLE_BITS)

    def to_representation(self, instance):
        if instance.precision_bits > DOUBLE_BITS:
            digits = _digits(instance.precision_bits)
            with mp.workprec(instance.precision_bits):
                coeffs = [[mp.nstr(mpc(c).real, digits), mp.nstr(mpc(c).imag, digits)] for c in instance.coeffs]
        else:
            coeffs = [[complex(c).real, complex(c).imag] for c in instance.coeffs]
        return {
            'order': instance.order,
            'coeffs': coeffs,
            'tag': instance.tag,
            'precision_bits': instance.precision_bits,
        }

    def validate(self, attrs):
        if len(attrs['coeffs']) != attrs['order']:
            raise serializers.ValidationError(
                {'coeffs': f'expected {attrs["order"]} coefficients, got {len(attrs["coeffs"])}'})
        bits = attrs['precision_bits']
        try:
            with mp.workprec(bits):
                values = [mpc(mpf(str(re)), mpf(str(im))) for re, im in attrs['coeffs']]
        except (TypeError, ValueError):
            raise serializers.ValidationError({'coeffs': 'coefficients must be numbers or numeric strings'})
        if values[0] == 0:
            raise serializers.ValidationError({'coeffs': 'a_1 = 0 is not a germ of diffeomorphism'})
        attrs['values'] = values
        return attrs

    def create(self, validated_data):
        return TruncatedGerm.from_coefficients(validated_data['values'], validated_data['tag'],
                                               validated_data['precision_bits'], validated_data['order'])


class RotationNumberSerializer(serializers.Serializer):
    """{"pq", "precision_bits", "tail"} plus derived convergents and value"""
    pq = serializers.ListField(child=serializers.IntegerField(min_value=0), min_length=2)
    precision_bits = serializers.IntegerField(min_value=DOUBLE_BITS, default=128)
    tail = serializers.ChoiceField(choices=TAILS, default='golden')
    capped = serializers.ListField(child=serializers.IntegerField(), read_only=True)
    convergents = serializers.SerializerMethodField()
    value = serializers.SerializerMethodField()

    def get_convergents(self, obj):
        return [[p, q] for p, q in obj.convergents]

    def get_value(self, obj):
        with mp.workprec(obj.precision_bits):
            return mp.nstr(obj.value, _digits(obj.precision_bits))

    def validate_pq(self, value):
        if value[0] != 0 or any(a < 1 for a in value[1:]):
            raise serializers.ValidationError('expected [0, a_1, a_2, ...] with positive a_k')
        return value

    def create(self, validated_data):
        return RotationNumber(tuple(validated_data['pq']), validated_data['precision_bits'], validated_data['tail'])


class NormalFormSerializer(serializers.Serializer):
    order_achieved = serializers.IntegerField()
    small_divisors = serializers.ListField(child=serializers.FloatField())
    phi = GermSerializer()
    reduced = GermSerializer()
    residual = serializers.FloatField()
    verified = serializers.BooleanField()
    note = serializers.CharField()


class CommutationReportSerializer(serializers.Serializer):
    order = serializers.IntegerField()
    commute = serializers.BooleanField()
    verdict = serializers.CharField()
    obstruction_degree = serializers.IntegerField(allow_null=True)
    obstruction_coefficient = ComplexField()
    multiplier_residual = serializers.FloatField()
    tol = serializers.FloatField()
    note = serializers.CharField()


class SampleSerializer(serializers.Serializer):
    r = serializers.FloatField()
    M = serializers.IntegerField(allow_null=True)
    k = serializers.IntegerField(allow_null=True)
    error_k = serializers.FloatField(source='error', allow_null=True)
    ceiling = serializers.FloatField(allow_null=True)

    def get_fields(self):
        fields = super().get_fields()
        fields['pass'] = serializers.BooleanField(source='ok')
        return fields


class VerificationReportSerializer(serializers.Serializer):
    name = serializers.CharField()
    samples = SampleSerializer(many=True)
    fitted_slope = serializers.FloatField(allow_null=True)
    expected_slope = serializers.FloatField()
    slope_tolerance = serializers.FloatField()
    measured_constants = serializers.DictField(child=serializers.FloatField())
    degenerate = serializers.BooleanField()
    sharp = serializers.BooleanField(allow_null=True)
    notes = serializers.ListField(child=serializers.CharField())

    def get_fields(self):
        fields = super().get_fields()
        fields['pass'] = serializers.BooleanField(source='passed')
        return fields


class ProbeSerializer(serializers.Serializer):
    k = serializers.IntegerField()
    q = serializers.IntegerField()
    n = serializers.IntegerField()
    radius = serializers.FloatField()
    m = serializers.IntegerField()
    rotation_distance = serializers.FloatField()
    distance = serializers.FloatField()
    ball_radius = serializers.FloatField()
    hit = serializers.BooleanField()


class Prop33ReportSerializer(serializers.Serializer):
    probes = ProbeSerializer(many=True)
    epsilon = serializers.FloatField()
    ball_constant = serializers.FloatField()
    ball_slope = serializers.FloatField(allow_null=True)
    hypothesis_ok = serializers.BooleanField()
    k0 = serializers.IntegerField()
    notes = serializers.ListField(child=serializers.CharField())

    def get_fields(self):
        fields = super().get_fields()
        fields['pass'] = serializers.BooleanField(source='passed')
        return fields


class TrackedDomainSerializer(serializers.Serializer):
    n = serializers.IntegerField()
    basepoint = ComplexField()
    diameter = serializers.FloatField()
    boundary_distance = serializers.SerializerMethodField()
    vertices = serializers.ListField(child=ComplexField())

    def get_boundary_distance(self, obj):
        return obj.boundary_distance()


class CompactSidecarSerializer(serializers.Serializer):
    """JSON sidecar written next to a rendered mask"""
    radius = serializers.FloatField(min_value=0)
    resolution = serializers.IntegerField(min_value=MIN_RESOLUTION)
    max_iter = serializers.IntegerField(min_value=1)
    extent = serializers.FloatField(min_value=0)
    area = serializers.FloatField()
    interior_area = serializers.FloatField()
    contact = serializers.BooleanField()
    mask = serializers.CharField()
    heatmap = serializers.CharField(allow_null=True, required=False, default=None)
    domain = serializers.DictField()
    backward_mode = serializers.CharField(default='series')
    grid_precision_bits = serializers.IntegerField(default=DOUBLE_BITS)
    germ = GermSerializer(required=False)
    config = serializers.DictField(required=False, default=dict)


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Effective configuration of one command run. Every value is JSON-native so
    the validated data can be echoed verbatim into sidecars and reports.
    """
    germ = serializers.ChoiceField(choices=list(FAMILIES), allow_null=True, required=False)
    coeffs = serializers.CharField(allow_null=True, required=False)
    germ_file = serializers.CharField(allow_null=True, required=False)
    f = serializers.ChoiceField(choices=list(FAMILIES), allow_null=True, required=False)
    g = serializers.ChoiceField(choices=list(FAMILIES), allow_null=True, required=False)
    alpha_cf = serializers.CharField(allow_null=True, required=False)
    alpha_liouville = serializers.CharField(allow_null=True, required=False)
    alpha_rational = serializers.CharField(allow_null=True, required=False)
    golden_depth = serializers.IntegerField(min_value=1, max_value=10_000, default=24)
    order = serializers.IntegerField(min_value=2, max_value=512)
    N = serializers.IntegerField(min_value=2, max_value=512, allow_null=True, required=False)
    exponent = serializers.IntegerField(min_value=2, max_value=512, allow_null=True, required=False)
    precision_bits = serializers.IntegerField(min_value=DOUBLE_BITS, max_value=8192)
    tol = serializers.FloatField(min_value=0)
    threads = serializers.IntegerField(min_value=1, max_value=256)
    radius = serializers.FloatField(min_value=1e-12, allow_null=True, required=False)
    margin = serializers.FloatField(min_value=1e-12, allow_null=True, required=False)
    resolution = serializers.IntegerField(min_value=MIN_RESOLUTION, max_value=16_384, allow_null=True, required=False)
    max_iter = serializers.IntegerField(min_value=1)
    extent_factor = serializers.FloatField(min_value=1.0)
    backward = serializers.ChoiceField(choices=['series', 'newton'], default='series')
    reduce = serializers.IntegerField(min_value=2, allow_null=True, required=False)
    linearize = serializers.BooleanField(default=False)
    heatmap = serializers.BooleanField(default=False)
    radii = serializers.CharField(allow_null=True, required=False)
    ks = serializers.CharField(allow_null=True, required=False)
    n_range = serializers.CharField(allow_null=True, required=False)
    samples = serializers.IntegerField(min_value=1, allow_null=True, required=False)
    k_max = serializers.IntegerField(min_value=1, allow_null=True, required=False)
    slope_tolerance = serializers.FloatField(min_value=0, allow_null=True, required=False)
    d = serializers.IntegerField(min_value=1, allow_null=True, required=False)
    k0 = serializers.IntegerField(min_value=0, default=1)
    max_q = serializers.IntegerField(min_value=1, default=10 ** 5)
    zn_start = serializers.FloatField(min_value=1e-12, default=0.19)
    zn_ratio = serializers.FloatField(min_value=1e-6, max_value=1.0, default=0.9)
    zn_count = serializers.IntegerField(min_value=2, default=60)
    ball_factor = serializers.FloatField(min_value=0, default=10.0)
    ball_power = serializers.FloatField(min_value=0, allow_null=True, required=False)
    z0 = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2, allow_null=True,
                               required=False)
    rho = serializers.FloatField(min_value=1e-12, allow_null=True, required=False)
    refine_depth = serializers.IntegerField(min_value=0)
    compact = serializers.CharField(allow_null=True, required=False)
    out = serializers.CharField(allow_null=True, required=False)

    def validate(self, attrs):
        alphas = [attrs.get(k) for k in ('alpha_cf', 'alpha_liouville', 'alpha_rational')]
        if sum(1 for a in alphas if a) > 1:
            raise serializers.ValidationError('give at most one of alpha_cf, alpha_liouville, alpha_rational')
        sources = [attrs.get(k) for k in ('germ', 'coeffs', 'germ_file')]
        if sum(1 for s in sources if s) > 1:
            raise serializers.ValidationError('give at most one of germ, coeffs, germ_file')
        radius, margin = attrs.get('radius'), attrs.get('margin')
        if radius and margin and margin <= radius:
            raise serializers.ValidationError({'margin': 'margin must exceed the domain radius'})
        if attrs.get('N') and attrs['N'] > attrs['order'] + 1:
            raise serializers.ValidationError({'N': 'N cannot exceed the truncation order'})
        if attrs.get('exponent') and attrs['exponent'] > attrs['order']:
            raise serializers.ValidationError({'exponent': 'the family exponent cannot exceed the truncation order'})
        return attrs
