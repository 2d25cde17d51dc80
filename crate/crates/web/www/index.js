import init, { ladder, wernerCurve, couplingRates } from './pkg/nqcc_web.js';

const $ = (id) => document.getElementById(id);

function show(id, text, error = false) {
  const el = $(id);
  el.textContent = text;
  el.classList.toggle('err', error);
}

function axes(ctx, w, h, pad) {
  ctx.strokeStyle = '#888';
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

function drawLadder() {
  const canvas = $('ladder-canvas');
  const ctx = canvas.getContext('2d');
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let view;
  try {
    const skips = $('skips').value.split(',').map((s) => s.trim()).filter(Boolean).map(Number);
    view = ladder(Number($('rungs').value), new Uint32Array(skips), $('closed').checked, Number($('ticks').value));
  } catch (e) {
    show('ladder-out', e.message ?? String(e), true);
    return;
  }
  const rows = view.rows;
  show('ladder-out', `period ${view.period}`);
  const cols = rows[0].length;
  const cell = Math.max(2, Math.min(Math.floor(canvas.width / cols), Math.floor(canvas.height / rows.length)));
  rows.forEach((row, t) => {
    [...row].forEach((ch, r) => {
      if (ch === '.') return;
      // separator columns grey, ticks at multiples of the period red
      ctx.fillStyle = ch === '|' ? '#ccc' : t % view.period === 0 ? '#c33' : '#333';
      ctx.fillRect(r * cell, t * cell, cell - 1, cell - 1);
    });
  });
  view.free();
}

function drawWerner() {
  const canvas = $('werner-canvas');
  const ctx = canvas.getContext('2d');
  const { width: w, height: h } = canvas;
  const pad = 30;
  ctx.clearRect(0, 0, w, h);
  axes(ctx, w, h, pad);
  const flat = wernerCurve(Number($('points').value));
  const x = (p) => pad + p * (w - 2 * pad);
  // eigenvalue range is [-0.5, 0.25]
  const y = (l) => pad + ((0.25 - l) / 0.75) * (h - 2 * pad);
  ctx.strokeStyle = '#bbb';
  ctx.beginPath();
  ctx.moveTo(x(0), y(0));
  ctx.lineTo(x(1), y(0));
  ctx.stroke();
  ctx.strokeStyle = '#36c';
  ctx.beginPath();
  let crossing = null;
  for (let i = 0; i < flat.length; i += 2) {
    const [p, l] = [flat[i], flat[i + 1]];
    if (i === 0) ctx.moveTo(x(p), y(l));
    else ctx.lineTo(x(p), y(l));
    if (crossing === null && l < -1e-10) crossing = p;
  }
  ctx.stroke();
  show('werner-out', crossing === null ? 'no entangled sample' : `first entangled sample at p = ${crossing.toFixed(4)}`);
}

function drawRates() {
  const canvas = $('rates-canvas');
  const ctx = canvas.getContext('2d');
  const { width: w, height: h } = canvas;
  const pad = 30;
  ctx.clearRect(0, 0, w, h);
  let flat;
  try {
    flat = couplingRates(Number($('max-n').value), Number($('trials').value), BigInt($('seed').value));
  } catch (e) {
    show('rates-out', e.message ?? String(e), true);
    return;
  }
  axes(ctx, w, h, pad);
  const n = flat.length / 3;
  const slot = (w - 2 * pad) / n;
  const y = (v) => h - pad - v * (h - 2 * pad);
  const parts = [];
  for (let i = 0; i < n; i++) {
    const [k, got, want] = [flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]];
    const left = pad + i * slot + slot * 0.2;
    ctx.fillStyle = '#6a6';
    ctx.fillRect(left, y(got), slot * 0.6, y(0) - y(got));
    ctx.strokeStyle = '#c33';
    ctx.beginPath();
    ctx.moveTo(left - 4, y(want));
    ctx.lineTo(left + slot * 0.6 + 4, y(want));
    ctx.stroke();
    ctx.fillStyle = '#222';
    ctx.fillText(`n=${k}`, left, h - pad + 14);
    parts.push(`${k}: ${got.toFixed(4)} / ${want.toFixed(4)}`);
  }
  show('rates-out', parts.join('  '));
}

await init();
$('ladder-run').addEventListener('click', drawLadder);
$('points').addEventListener('input', drawWerner);
$('rates-run').addEventListener('click', drawRates);
drawLadder();
drawWerner();
drawRates();
