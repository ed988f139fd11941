/** DOM wiring for the phase-space explorer. All numerics displayed here are
 * read from service responses; this file only routes data and renders. */
import { ApiClient, type JobKind, type Manifest, type TrajectoriesResponse } from './api.js';
import { brushToInitRegion } from './brush.js';
import { drawMarkers, drawOrbits, drawPolyline, drawSelection, makeTransform, type Transform } from './canvas.js';
import { extractFdim, fittedLine, logPoints, summaryText } from './fdim.js';
import { displayState, pollJob } from './jobs.js';
import {
  dropJob,
  initialViewState,
  selectRun,
  setAxes,
  setDataBounds,
  setSelection,
  setViewport,
  stateVarsOf,
  trackJob,
  type ViewState,
} from './viewstate.js';
import { dataExtents, padDegenerate, panRect, trajectoriesQuery, zoomRect, type Rect } from './window.js';

const SERVICE = (window as unknown as { CHAOSCOPE_SERVICE?: string }).CHAOSCOPE_SERVICE
  ?? 'http://127.0.0.1:8765';
const DECIMATE = 2000;

const client = new ApiClient(SERVICE);
let state: ViewState = initialViewState();
let orbits: TrajectoriesResponse | null = null;

const el = {
  runs: document.getElementById('runs') as HTMLSelectElement,
  axisX: document.getElementById('axis-x') as HTMLSelectElement,
  axisY: document.getElementById('axis-y') as HTMLSelectElement,
  canvas: document.getElementById('plot') as HTMLCanvasElement,
  fdimCanvas: document.getElementById('fdim-plot') as HTMLCanvasElement,
  status: document.getElementById('status') as HTMLElement,
  brushToggle: document.getElementById('brush-mode') as HTMLInputElement,
  otherRanges: document.getElementById('other-ranges') as HTMLElement,
  jobKind: document.getElementById('job-kind') as HTMLSelectElement,
  jobForm: document.getElementById('job-form') as HTMLFormElement,
  jobList: document.getElementById('job-list') as HTMLElement,
  fdimSummary: document.getElementById('fdim-summary') as HTMLElement,
  resetView: document.getElementById('reset-view') as HTMLButtonElement,
};

function setStatus(text: string): void {
  el.status.textContent = text;
}

function currentTransform(): Transform | null {
  if (!state.viewport) return null;
  return makeTransform(state.viewport, el.canvas.width, el.canvas.height);
}

function redraw(): void {
  const ctx = el.canvas.getContext('2d');
  const tf = currentTransform();
  if (!ctx || !tf || !orbits) return;
  drawOrbits(ctx, orbits.orbits, tf, el.canvas.width, el.canvas.height);
  if (state.selection) drawSelection(ctx, state.selection, tf);
}

async function refetchOrbits(): Promise<void> {
  if (!state.runId || !state.axes) return;
  const query = trajectoriesQuery(state.axes, state.viewport ?? undefined, DECIMATE);
  setStatus('loading trajectories...');
  orbits = await client.getTrajectories(state.runId, query);
  if (!state.dataBounds) {
    const extents = dataExtents(orbits.orbits);
    if (extents) state = setDataBounds(state, padDegenerate(extents));
  }
  setStatus(`${orbits.orbits.length} orbits`);
  redraw();
}

async function onRunChange(): Promise<void> {
  const runId = el.runs.value;
  if (!runId) return;
  const manifest: Manifest = await client.getRun(runId);
  state = selectRun(state, manifest);
  populateAxisSelectors(manifest);
  populateOtherRanges(manifest);
  orbits = null;
  await refetchOrbits();
}

function populateAxisSelectors(manifest: Manifest): void {
  const vars = stateVarsOf(manifest);
  for (const select of [el.axisX, el.axisY]) {
    select.innerHTML = '';
    for (const name of vars) {
      const option = document.createElement('option');
      option.value = name;
      option.textContent = name;
      select.appendChild(option);
    }
  }
  if (state.axes) {
    el.axisX.value = state.axes[0];
    el.axisY.value = state.axes[1];
  }
}

function populateOtherRanges(manifest: Manifest): void {
  el.otherRanges.innerHTML = '';
  for (const range of manifest.region.ranges) {
    const row = document.createElement('div');
    row.className = 'range-row';
    row.dataset.var = range.var;
    row.innerHTML =
      `<label>${range.var}</label>` +
      `<input class="lo" type="number" step="any" value="${range.lo}">` +
      `<input class="hi" type="number" step="any" value="${range.hi}">`;
    el.otherRanges.appendChild(row);
  }
}

function onAxesChange(): void {
  try {
    state = setAxes(state, el.axisX.value, el.axisY.value);
    orbits = null;
    void refetchOrbits();
  } catch (err) {
    setStatus(String(err));
  }
}

// zoom, pan, brush -----------------------------------------------------------

let dragStart: [number, number] | null = null;

el.canvas.addEventListener('wheel', (event) => {
  event.preventDefault();
  const tf = currentTransform();
  if (!tf || !state.viewport) return;
  const factor = event.deltaY > 0 ? 1.25 : 0.8;
  const center: [number, number] = [
    tf.toDataX(event.offsetX),
    tf.toDataY(event.offsetY),
  ];
  state = setViewport(state, zoomRect(state.viewport, factor, center));
  void refetchOrbits();
});

el.canvas.addEventListener('mousedown', (event) => {
  dragStart = [event.offsetX, event.offsetY];
});

el.canvas.addEventListener('mouseup', (event) => {
  const tf = currentTransform();
  if (!dragStart || !tf || !state.viewport) {
    dragStart = null;
    return;
  }
  const [x0, y0] = dragStart;
  const [x1, y1] = [event.offsetX, event.offsetY];
  dragStart = null;
  if (el.brushToggle.checked) {
    const rect: Rect = {
      xlo: Math.min(tf.toDataX(x0), tf.toDataX(x1)),
      xhi: Math.max(tf.toDataX(x0), tf.toDataX(x1)),
      ylo: Math.min(tf.toDataY(y0), tf.toDataY(y1)),
      yhi: Math.max(tf.toDataY(y0), tf.toDataY(y1)),
    };
    state = setSelection(state, rect);
    redraw();
  } else {
    const dx = tf.toDataX(x0) - tf.toDataX(x1);
    const dy = tf.toDataY(y0) - tf.toDataY(y1);
    if (dx !== 0 || dy !== 0) {
      state = setViewport(state, panRect(state.viewport, dx, dy));
      void refetchOrbits();
    }
  }
});

el.resetView.addEventListener('click', () => {
  if (state.dataBounds) {
    state = setViewport(state, state.dataBounds);
    void refetchOrbits();
  }
});

// jobs -------------------------------------------------------------------

function collectOtherRanges(): Record<string, [number, number]> {
  const out: Record<string, [number, number]> = {};
  for (const row of el.otherRanges.querySelectorAll<HTMLElement>('.range-row')) {
    const name = row.dataset.var as string;
    const lo = Number((row.querySelector('.lo') as HTMLInputElement).value);
    const hi = Number((row.querySelector('.hi') as HTMLInputElement).value);
    out[name] = [lo, hi];
  }
  return out;
}

function formNumber(name: string): number {
  const input = el.jobForm.elements.namedItem(name) as HTMLInputElement;
  return Number(input.value);
}

function formText(name: string): string {
  return (el.jobForm.elements.namedItem(name) as HTMLInputElement).value;
}

function composePayload(kind: JobKind): Record<string, unknown> {
  if (!state.manifest || !state.axes) {
    throw new Error('select a run first');
  }
  if (!state.selection) {
    throw new Error('brush a region first');
  }
  const region = brushToInitRegion(
    stateVarsOf(state.manifest), state.axes, state.selection, collectOtherRanges(),
  );
  const base: Record<string, unknown> = {
    system_source: state.manifest.system_source,
    system_name: state.manifest.system_name,
    region,
    t_calc_step: formNumber('t_calc_step'),
    number_ic: formNumber('number_ic'),
    seed: formNumber('seed'),
  };
  if (kind === 'solve') {
    base.t_range = [0, formNumber('t_final')];
    const predicate = formText('predicate');
    if (predicate.trim() !== '') base.predicate = predicate;
  } else {
    base.predicate = formText('predicate');
    base.t_final = formNumber('t_final');
  }
  if (kind === 'boxcount') {
    base.epsilon = formNumber('eps_lo');
  }
  if (kind === 'fdim') {
    base.epsilon_range = [formNumber('eps_lo'), formNumber('eps_hi')];
    base.n_epsilons = formNumber('n_epsilons');
  }
  return base;
}

el.jobForm.addEventListener('submit', (event) => {
  event.preventDefault();
  void submitJob();
});

async function submitJob(): Promise<void> {
  const kind = el.jobKind.value as JobKind;
  let payload: Record<string, unknown>;
  try {
    payload = composePayload(kind);
  } catch (err) {
    setStatus(String(err));
    return;
  }
  const { job_id } = await client.submitJob(kind, payload);
  state = trackJob(state, job_id);
  const row = document.createElement('div');
  row.className = 'job-row';
  el.jobList.appendChild(row);
  const cancel = document.createElement('button');
  cancel.textContent = 'cancel';
  cancel.addEventListener('click', () => void client.cancelJob(job_id).catch(() => undefined));
  row.append(`${kind} ${job_id}: `, cancel);
  const label = document.createElement('span');
  row.appendChild(label);

  const finished = await pollJob(client, job_id, {
    onUpdate: (job) => {
      label.textContent = ` ${displayState(job)} ${(job.progress * 100).toFixed(0)}%`;
    },
  });
  state = dropJob(state, job_id);
  label.textContent = ` ${displayState(finished)}`;
  if (finished.state === 'done' && finished.result_ref && kind === 'fdim') {
    await renderFdim(finished.result_ref);
  }
}

async function renderFdim(runId: string): Promise<void> {
  const results = await client.getResults(runId);
  const data = extractFdim(results);
  if (!data) return;
  el.fdimSummary.textContent = summaryText(data);
  const pts = logPoints(data);
  if (pts.length === 0) return;
  const xs = pts.map((p) => p.x);
  const ys = pts.map((p) => p.y);
  const view: Rect = {
    xlo: Math.min(...xs), xhi: Math.max(...xs),
    ylo: Math.min(...ys), yhi: Math.max(...ys),
  };
  const padded = padDegenerate({
    xlo: view.xlo - 0.2, xhi: view.xhi + 0.2,
    ylo: view.ylo - 0.2, yhi: view.yhi + 0.2,
  });
  const ctx = el.fdimCanvas.getContext('2d');
  if (!ctx) return;
  const tf = makeTransform(padded, el.fdimCanvas.width, el.fdimCanvas.height);
  ctx.clearRect(0, 0, el.fdimCanvas.width, el.fdimCanvas.height);
  const line = fittedLine(data, padded.xlo, padded.xhi);
  drawPolyline(ctx, line, tf, '#2ca02c');
  drawMarkers(ctx, pts, tf, '#1f77b4');
}

// boot -------------------------------------------------------------------

async function boot(): Promise<void> {
  const runs = await client.listRuns();
  el.runs.innerHTML = '<option value="">select a run</option>';
  for (const run of runs) {
    const option = document.createElement('option');
    option.value = run.run_id;
    option.textContent = `${run.run_id} (${run.system_name})`;
    el.runs.appendChild(option);
  }
  el.runs.addEventListener('change', () => void onRunChange());
  el.axisX.addEventListener('change', onAxesChange);
  el.axisY.addEventListener('change', onAxesChange);
  setStatus('ready');
}

void boot();
