from rest_framework.generics import ListAPIView, RetrieveAPIView
from rest_framework.permissions import AllowAny

from synthesis.models import SynthesisRun
from synthesis.pagination import SynthesisRunPagination
from synthesis.serializers import SynthesisRunDetailSerializer, SynthesisRunSerializer


class SynthesisRunList(ListAPIView):
    """
    Recorded synthesis runs, newest first. Filter with ?template=polyset or ?status=optimal
    """
    permission_classes = (AllowAny,)
    serializer_class = SynthesisRunSerializer
    pagination_class = SynthesisRunPagination

    def get_queryset(self):
        queryset = SynthesisRun.objects.all()
        template = self.request.query_params.get('template')
        status = self.request.query_params.get('status')
        if template:
            queryset = queryset.filter(template=template)
        if status:
            queryset = queryset.filter(status=status)
        return queryset


class SynthesisRunDetail(RetrieveAPIView):
    """
    One run, including the full solution
    """
    queryset = SynthesisRun.objects.all()
    permission_classes = (AllowAny,)
    serializer_class = SynthesisRunDetailSerializer
