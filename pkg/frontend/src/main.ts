import './style.css'
import { App } from './app'
import { ApiClient } from './api'

const root = document.getElementById('app')
if (!root) throw new Error('missing #app mount point')

new App(root, (annotatorId) => new ApiClient(annotatorId)).start()
