from rest_framework import serializers

from ..estimation import EstimatorConfig, Mode, SEED_LIMIT
from ..exceptions import DomainError
from ..poly import PhasePolynomial, parse_polynomials
from ..wtrick import PatternSpec, WTrickContext, level_from_kappa


def _as_validation_error(exc):
    return serializers.ValidationError(str(exc))


# === Файлы шаблонов ===
class PatternFileSerializer(serializers.Serializer):
    """Файл шаблона {r, d, polys}"""
    r = serializers.IntegerField(min_value=1)
    d = serializers.IntegerField(min_value=0)
    polys = serializers.ListField(child=serializers.CharField(), min_length=1)

    def validate(self, data):
        try:
            data['parsed'] = parse_polynomials(data['polys'], arity=data['r'])
        except DomainError as exc:
            raise _as_validation_error(exc)
        for text, poly in zip(data['polys'], data['parsed']):
            if poly.arity != data['r']:
                raise serializers.ValidationError(f"Многочлен {text!r} зависит от лишних переменных")
            if poly.degree > data['d']:
                raise serializers.ValidationError(f"Степень многочлена {text!r} больше d={data['d']}")
        return data

    def create(self, validated_data):
        # N и M приходят из аргументов команды через context
        return PatternSpec(
            validated_data['r'],
            validated_data['d'],
            validated_data['parsed'],
            N=self.context.get('N'),
            M=self.context.get('M'),
        )


class PolynomialListSerializer(serializers.Serializer):
    """Список многочленов из аргументов команды"""
    polys = serializers.ListField(child=serializers.CharField(), min_length=1)
    arity = serializers.IntegerField(min_value=1, required=False, allow_null=True)

    def create(self, validated_data):
        try:
            return parse_polynomials(validated_data['polys'], arity=validated_data.get('arity'))
        except DomainError as exc:
            raise _as_validation_error(exc)


class PhaseSerializer(serializers.Serializer):
    """Фаза суммы Вейля"""
    poly = serializers.CharField()
    dims = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1)

    def validate(self, data):
        try:
            data['phase'] = PhasePolynomial.parse(data['poly'], arity=len(data['dims']))
        except DomainError as exc:
            raise _as_validation_error(exc)
        if data['phase'].arity != len(data['dims']):
            raise serializers.ValidationError("Число диапазонов не совпадает с числом переменных")
        return data


# === Параметры запуска ===
class EstimatorArgsSerializer(serializers.Serializer):
    """Общие параметры оценивателя"""
    mode = serializers.ChoiceField(choices=['exact', 'mc', 'monte_carlo'], default='exact')
    samples = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    seed = serializers.IntegerField(min_value=0, max_value=SEED_LIMIT - 1, required=False, allow_null=True)
    workers = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    op_cap = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    chunk_size = serializers.IntegerField(min_value=1, required=False, allow_null=True)

    def create(self, validated_data):
        values = {
            'mode': Mode.parse(validated_data['mode']),
            'samples': validated_data.get('samples'),
            'rng_seed': validated_data.get('seed'),
            'workers': validated_data.get('workers'),
            'op_cap': validated_data.get('op_cap'),
            'chunk_size': validated_data.get('chunk_size'),
        }
        return EstimatorConfig(**{key: value for key, value in values.items() if value is not None})


class WTrickArgsSerializer(serializers.Serializer):
    """Параметры W-трюка; R задаётся явно или через kappa"""
    w = serializers.IntegerField(min_value=2)
    N = serializers.IntegerField(min_value=1)
    R = serializers.IntegerField(min_value=2, required=False, allow_null=True)
    kappa = serializers.FloatField(min_value=0, max_value=1, required=False, allow_null=True)
    b = serializers.IntegerField(min_value=1, default=1)

    def validate(self, data):
        if data.get('R') is None and data.get('kappa') is None:
            raise serializers.ValidationError("Нужно указать R или kappa")
        if data.get('R') is not None and data.get('kappa') is not None:
            raise serializers.ValidationError("R и kappa взаимоисключающие")
        return data

    def create(self, validated_data):
        R = validated_data.get('R')
        try:
            if R is None:
                R = level_from_kappa(validated_data['N'], validated_data['kappa'])
            return WTrickContext(validated_data['w'], validated_data['N'], R, validated_data['b'])
        except DomainError as exc:
            raise _as_validation_error(exc)


# === Манифест ===
class ReferenceSerializer(serializers.Serializer):
    """Опорный запуск для сравнения"""
    command = serializers.CharField(required=False)
    args = serializers.DictField(required=False, default=dict)
    field = serializers.CharField(required=False)


class ManifestEntrySerializer(serializers.Serializer):
    """Один запуск приёмочного набора"""
    CHECKS = [
        'approx', 'at_most', 'at_least', 'not_below_reference',
        'nearer_than_reference', 'ratio_to_reference', 'matches_reference', 'identical_to_reference',
    ]
    REFERENCE_CHECKS = {
        'not_below_reference', 'nearer_than_reference', 'ratio_to_reference', 'matches_reference',
        'identical_to_reference',
    }

    name = serializers.CharField(required=False)
    command = serializers.CharField()
    args = serializers.DictField(required=False, default=dict)
    field = serializers.CharField(default='value')
    check = serializers.ChoiceField(choices=CHECKS, default='approx')
    expected = serializers.FloatField(required=False, allow_null=True)
    tolerance = serializers.FloatField(min_value=0, default=0.0)
    relative = serializers.BooleanField(default=False)
    reference = ReferenceSerializer(required=False)

    def validate(self, data):
        needs_expected = data['check'] in {'approx', 'at_most', 'at_least', 'nearer_than_reference'}
        if needs_expected and data.get('expected') is None:
            raise serializers.ValidationError(f"Проверка {data['check']} требует expected")
        if data['check'] in self.REFERENCE_CHECKS and 'reference' not in data:
            raise serializers.ValidationError(f"Проверка {data['check']} требует reference")
        data.setdefault('name', data['command'])
        return data
